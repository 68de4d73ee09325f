#include "esmruin/dist_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "esmruin/discretize.hpp"
#include "esmruin/errors.hpp"
#include "esmruin/pmf.hpp"
#include "esmruin/quadrature.hpp"

namespace esm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QuadOptions tail_quad() {
    QuadOptions o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-12;
    o.max_subdivisions = 400;
    return o;
}

}  // namespace

double Distribution::quantile(double q) const {
    require(q >= 0.0 && q < 1.0, "quantile: q must lie in [0, 1)");
    if (q == 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (cdf(hi) < q) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NoRootError("quantile: could not bracket");
    }
    auto f = [&](double x) { return cdf(x) - q; };
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

double Distribution::second_moment() const {
    return integrate([&](double t) { return 2.0 * t * sf(t); }, {0.0, kInf}, tail_quad());
}

double Distribution::mean_above(double x) const {
    if (!std::isfinite(mean())) return kInf;
    return x * sf(x) + integrate([&](double t) { return sf(t); }, {x, kInf}, tail_quad());
}

std::optional<double> Distribution::moment_cdf_closed(double) const { return std::nullopt; }

ParetoClaim::ParetoClaim(double phi) : phi_(phi) {
    require(phi > 1.0, "ParetoClaim: phi must exceed 1");
}

double ParetoClaim::sf(double x) const {
    if (x <= 0.0) return 1.0;
    return std::exp(-phi_ * std::log1p(x / (phi_ - 1.0)));
}

double ParetoClaim::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return -std::expm1(-phi_ * std::log1p(x / (phi_ - 1.0)));
}

double ParetoClaim::pdf(double x) const {
    if (x < 0.0) return 0.0;
    double a = phi_ - 1.0;
    return phi_ / a * std::exp(-(phi_ + 1.0) * std::log1p(x / a));
}

double ParetoClaim::second_moment() const {
    if (phi_ <= 2.0) return kInf;
    return 2.0 * (phi_ - 1.0) / (phi_ - 2.0);
}

double ParetoClaim::quantile(double q) const {
    require(q >= 0.0 && q < 1.0, "ParetoClaim::quantile: q must lie in [0, 1)");
    return (phi_ - 1.0) * std::expm1(-std::log1p(-q) / phi_);
}

double ParetoClaim::mean_above(double x) const {
    if (x <= 0.0) return 1.0;
    double a = phi_ - 1.0;
    double l = std::log1p(x / a);
    return x * std::exp(-phi_ * l) + std::exp(-a * l);
}

std::optional<double> ParetoClaim::moment_cdf_closed(double s) const {
    if (s <= 0.0) return 0.0;
    if (std::isinf(s)) return 1.0;
    double a = phi_ - 1.0;
    double l = std::log1p(s / a);
    return -std::expm1(-a * l) - s * std::exp(-phi_ * l);
}

ParetoIntegratedTail::ParetoIntegratedTail(double phi) : phi_(phi) {
    require(phi > 1.0, "ParetoIntegratedTail: phi must exceed 1");
}

double pareto_integrated_tail(double x, double phi) {
    require(phi > 1.0, "pareto_integrated_tail: phi must exceed 1");
    require(x >= 0.0, "pareto_integrated_tail: x must be nonnegative");
    if (std::isinf(x)) return 1.0;
    double a = phi - 1.0;
    return -std::expm1(-a * std::log1p(x / a));
}

double ParetoIntegratedTail::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    return pareto_integrated_tail(x, phi_);
}

double ParetoIntegratedTail::sf(double x) const {
    if (x <= 0.0) return 1.0;
    double a = phi_ - 1.0;
    return std::exp(-a * std::log1p(x / a));
}

double ParetoIntegratedTail::pdf(double x) const {
    if (x < 0.0) return 0.0;
    return std::exp(-phi_ * std::log1p(x / (phi_ - 1.0)));
}

double ParetoIntegratedTail::mean() const {
    double a = phi_ - 1.0;
    return a > 1.0 ? a / (a - 1.0) : kInf;
}

double ParetoIntegratedTail::quantile(double q) const {
    require(q >= 0.0 && q < 1.0, "ParetoIntegratedTail::quantile: q must lie in [0, 1)");
    double a = phi_ - 1.0;
    return a * std::expm1(-std::log1p(-q) / a);
}

double ParetoIntegratedTail::mean_above(double x) const {
    double a = phi_ - 1.0;
    if (a <= 1.0) return kInf;
    double l = std::log1p(std::max(x, 0.0) / a);
    return std::max(x, 0.0) * std::exp(-a * l) + a / (a - 1.0) * std::exp(-(a - 1.0) * l);
}

Exponential::Exponential(double rate) : rate_(rate) {
    require(rate > 0.0, "Exponential: rate must be positive");
}

double Exponential::cdf(double x) const { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
double Exponential::sf(double x) const { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
double Exponential::pdf(double x) const { return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x); }

double Exponential::quantile(double q) const {
    require(q >= 0.0 && q < 1.0, "Exponential::quantile: q must lie in [0, 1)");
    return -std::log1p(-q) / rate_;
}

double Exponential::mean_above(double x) const {
    x = std::max(x, 0.0);
    return (x + 1.0 / rate_) * std::exp(-rate_ * x);
}

DiscreteLaw::DiscreteLaw(std::vector<double> atoms, std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
    require(!atoms_.empty() && atoms_.size() == probs_.size(), "DiscreteLaw: atoms and probs must match");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        require(atoms_[i] >= 0.0 && probs_[i] >= 0.0, "DiscreteLaw: atoms and probs must be nonnegative");
        if (i > 0) require(atoms_[i] > atoms_[i - 1], "DiscreteLaw: atoms must be strictly increasing");
    }
    double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    require(std::fabs(total - 1.0) < 1e-12, "DiscreteLaw: probabilities must sum to 1");
}

double DiscreteLaw::cdf(double x) const {
    double c = 0.0;
    for (std::size_t i = 0; i < atoms_.size() && atoms_[i] <= x; ++i) c += probs_[i];
    return std::min(c, 1.0);
}

double DiscreteLaw::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) m += atoms_[i] * probs_[i];
    return m;
}

double DiscreteLaw::second_moment() const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) m += atoms_[i] * atoms_[i] * probs_[i];
    return m;
}

double DiscreteLaw::quantile(double q) const {
    double c = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        c += probs_[i];
        if (c >= q) return atoms_[i];
    }
    return atoms_.back();
}

double DiscreteLaw::mean_above(double x) const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i] > x) m += atoms_[i] * probs_[i];
    return m;
}

std::optional<double> DiscreteLaw::moment_cdf_closed(double s) const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms_.size() && atoms_[i] <= s; ++i) m += atoms_[i] * probs_[i];
    return m / mean();
}

IntegratedTail::IntegratedTail(DistributionPtr claim) : claim_(std::move(claim)) {
    require(claim_ != nullptr, "IntegratedTail: null source");
    mu_ = claim_->mean();
    if (!std::isfinite(mu_)) throw InfiniteMeanError("IntegratedTail: source mean is infinite");
    require(mu_ > 0.0, "IntegratedTail: source mean must be positive");
}

double IntegratedTail::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    auto f = [&](double t) { return claim_->sf(t); };
    if (x <= mu_) return integrate(f, 0.0, x, tail_quad()) / mu_;
    return 1.0 - integrate(f, {x, kInf}, tail_quad()) / mu_;
}

double IntegratedTail::pdf(double x) const { return x < 0.0 ? 0.0 : claim_->sf(x) / mu_; }

double IntegratedTail::mean() const { return claim_->second_moment() / (2.0 * mu_); }

MomentDistribution::MomentDistribution(DistributionPtr source) : source_(std::move(source)) {
    require(source_ != nullptr, "MomentDistribution: null source");
    mu_ = source_->mean();
    if (!std::isfinite(mu_)) throw InfiniteMeanError("MomentDistribution: source mean is infinite");
    require(mu_ > 0.0, "MomentDistribution: source mean must be positive");
}

double MomentDistribution::cdf(double s) const { return moment_cdf(*source_, s); }

double MomentDistribution::pdf(double s) const { return s <= 0.0 ? 0.0 : s * source_->pdf(s) / mu_; }

double MomentDistribution::mean() const { return source_->second_moment() / mu_; }

double moment_cdf(const Distribution& dist, double s) {
    double mu = dist.mean();
    if (!std::isfinite(mu)) throw InfiniteMeanError("moment_cdf: source mean is infinite");
    require(mu > 0.0, "moment_cdf: source mean must be positive");
    if (s <= 0.0) return 0.0;
    if (auto closed = dist.moment_cdf_closed(s)) return *closed;
    if (std::isinf(s)) return 1.0;
    if (s <= mu) {
        QuadOptions o = tail_quad();
        return integrate([&](double t) { return t * dist.pdf(t); }, 0.0, s, o) / mu;
    }
    return 1.0 - dist.mean_above(s) / mu;
}

ErlangKernel::ErlangKernel(int xi) : xi_(xi) { require(xi >= 1, "ErlangKernel: xi must be at least 1"); }

double ErlangKernel::cdf(double s) const { return erlang_cdf(s, xi_); }
double ErlangKernel::sf(double s) const { return erlang_sf(s, xi_); }
double ErlangKernel::pdf(double s) const { return erlang_pdf(s, xi_); }
double ErlangKernel::integrated_tail(double s) const { return erlang_integrated_tail(s, xi_); }
double ErlangKernel::integrated_tail_complement(double s) const { return erlang_integrated_tail_complement(s, xi_); }
double ErlangKernel::epsilon() const { return epsilon_m(xi_); }
double ErlangKernel::epsilon(double delta) const { return epsilon_m_delta(xi_, delta); }

double erlang_cdf(double s, int xi) {
    require(xi >= 1, "erlang_cdf: xi must be at least 1");
    require(s >= 0.0, "erlang_cdf: s must be nonnegative");
    if (s == 0.0) return 0.0;
    if (std::isinf(s)) return 1.0;
    return boost::math::gamma_p(static_cast<double>(xi), xi * s);
}

double erlang_sf(double s, int xi) {
    require(xi >= 1, "erlang_sf: xi must be at least 1");
    require(s >= 0.0, "erlang_sf: s must be nonnegative");
    if (s == 0.0) return 1.0;
    if (std::isinf(s)) return 0.0;
    return boost::math::gamma_q(static_cast<double>(xi), xi * s);
}

double erlang_pdf(double s, int xi) {
    require(xi >= 1, "erlang_pdf: xi must be at least 1");
    if (s < 0.0 || std::isinf(s)) return 0.0;
    double x = static_cast<double>(xi);
    if (s == 0.0) return xi == 1 ? 1.0 : 0.0;
    return std::exp(x * std::log(x) + (x - 1.0) * std::log(s) - x * s - std::lgamma(x));
}

double epsilon_m(int xi) {
    require(xi >= 1, "epsilon_m: xi must be at least 1");
    double x = static_cast<double>(xi);
    return std::exp(x * std::log(x) - x - std::lgamma(x + 1.0));
}

// int_0^delta G = E[(N - xi)^+] / xi with N ~ Poisson(xi * delta)
double epsilon_m_delta(int xi, double delta) {
    require(xi >= 1, "epsilon_m_delta: xi must be at least 1");
    require(delta >= 0.0, "epsilon_m_delta: delta must be nonnegative");
    if (delta == 0.0) return 0.0;
    return pois_excess(xi, xi * delta) / xi;
}

// int_s^inf (1 - G) = E[(xi - N)^+] / xi with N ~ Poisson(xi * s)
double erlang_integrated_tail_complement(double s, int xi) {
    require(xi >= 1, "erlang_integrated_tail_complement: xi must be at least 1");
    require(s >= 0.0, "erlang_integrated_tail_complement: s must be nonnegative");
    if (std::isinf(s)) return 0.0;
    return pois_shortfall(xi, xi * s) / xi;
}

double erlang_integrated_tail(double s, int xi) {
    require(xi >= 1, "erlang_integrated_tail: xi must be at least 1");
    require(s >= 0.0, "erlang_integrated_tail: s must be nonnegative");
    if (s <= 1.0) return s - epsilon_m_delta(xi, s);
    return 1.0 - erlang_integrated_tail_complement(s, xi);
}

double mellin_star_cdf(const DiscreteScaling& pi, int xi, double u) {
    require(u >= 0.0, "mellin_star_cdf: u must be nonnegative");
    if (u == 0.0) return 0.0;
    double c = 0.0;
    const auto& s = pi.support();
    const auto& p = pi.probs();
    for (std::size_t j = 0; j < s.size(); ++j) c += p[j] * erlang_cdf(u / s[j], xi);
    return c;
}

double mellin_star_cdf(const Distribution& target, int xi, double u) {
    require(u >= 0.0, "mellin_star_cdf: u must be nonnegative");
    if (u == 0.0) return 0.0;
    double sd = 1.0 / std::sqrt(static_cast<double>(xi));
    std::vector<double> br{0.0};
    for (double k : {-8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 8.0, 16.0}) {
        double b = 1.0 + k * sd;
        if (b > br.back()) br.push_back(b);
    }
    br.push_back(kInf);
    QuadOptions o;
    o.abs_tol = 1e-13;
    o.max_subdivisions = 200;
    return integrate([&](double s) { return target.cdf(u / s) * erlang_pdf(s, xi); }, br, o);
}

}  // namespace esm
