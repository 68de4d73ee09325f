#include "esmruin/error_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "esmruin/csv.hpp"
#include "esmruin/errors.hpp"
#include "esmruin/search.hpp"

namespace esm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_rho(double rho) { require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)"); }

// Prefix suprema of |target - Pi| over the step function's candidate points.
class StepDistance {
public:
    StepDistance(const Distribution& target, const DiscreteScaling& pi) : target_(target), pi_(pi) {
        const auto& s = pi.support();
        const auto& c = pi.cumulative();
        prefix_.resize(s.size());
        double best = std::fabs(target.cdf(0.0));
        for (std::size_t j = 0; j < s.size(); ++j) {
            double t = target.cdf(s[j]);
            double t_left = target.cdf(std::nextafter(s[j], 0.0));
            double left = j == 0 ? 0.0 : c[j - 1];
            best = std::max({best, std::fabs(t_left - left), std::fabs(t - c[j])});
            prefix_[j] = best;
        }
        all_ = std::max(prefix_.back(), std::fabs(1.0 - pi.stored_mass()));
    }

    double up_to(double x) const {
        if (std::isinf(x)) return all_;
        const auto& s = pi_.support();
        auto it = std::upper_bound(s.begin(), s.end(), x);
        double v = std::fabs(target_.cdf(x) - pi_.cdf(x));
        if (it == s.begin()) return std::max(v, std::fabs(target_.cdf(0.0)));
        return std::max(v, prefix_[static_cast<std::size_t>(it - s.begin()) - 1]);
    }
    double all() const { return all_; }

private:
    const Distribution& target_;
    const DiscreteScaling& pi_;
    std::vector<double> prefix_;
    double all_ = 0.0;
};

}  // namespace

void IntervalScheme::validate() const {
    require(c > 0.0 && c < 1.0, "IntervalScheme: c must lie in (0, 1)");
    require(q > 0.0 && q < 1.0, "IntervalScheme: q must lie in (0, 1)");
    require(K >= 1, "IntervalScheme: K must be positive");
}

double IntervalScheme::a(int k) const {
    if (k <= 0) return 0.0;
    if (k > K) return 1.0;
    return 1.0 - c * std::pow(q, k);
}

double IntervalScheme::b(int k) const {
    if (k <= 0) return kInf;
    if (k > K) return 1.0;
    return 1.0 + c * std::pow(q, k);
}

std::string ErrorBudget::to_csv() const {
    std::string p = csv_quote(parameters.dump());
    std::string out = "source,value,parameters\n";
    out += csv_row({"erlangization", fmt12(erlangization), p});
    out += csv_row({"discretization", fmt12(discretization), p});
    out += csv_row({"truncation", fmt12(truncation), p});
    out += csv_row({"total", fmt12(total), p});
    return out;
}

double vatamidou_bound(double sup_diff, double rho, double f1_u, double f2_u) {
    check_rho(rho);
    require(sup_diff >= 0.0, "vatamidou_bound: sup_diff must be nonnegative");
    require(f1_u >= 0.0 && f1_u <= 1.0 && f2_u >= 0.0 && f2_u <= 1.0, "vatamidou_bound: cdf values must lie in [0, 1]");
    if (sup_diff == 0.0) return 0.0;
    return sup_diff * (1.0 - rho) * rho / ((1.0 - rho * f1_u) * (1.0 - rho * f2_u));
}

double erlangization_bound_a(const Distribution& fhat, int xi, double rho, double u, const IntervalScheme& scheme) {
    check_rho(rho);
    scheme.validate();
    require(xi >= 1, "erlangization_bound_a: xi must be at least 1");
    require(u >= 0.0, "erlangization_bound_a: u must be nonnegative");
    if (u == 0.0) return 0.0;
    auto ring_mass = [&](int k) {
        if (k == 0) return 1.0;
        if (k > scheme.K) return 0.0;
        return erlang_cdf(scheme.b(k), xi) - erlang_cdf(scheme.a(k), xi);
    };
    double total = 0.0;
    for (int k = 0; k <= scheme.K; ++k) {
        double w = ring_mass(k) - ring_mass(k + 1);
        if (w <= 0.0) continue;
        double ak = scheme.a(k), bk = scheme.b(k);
        auto gap = [&](double l) {
            double hi = ak == 0.0 ? 1.0 : fhat.cdf(l / ak);
            double lo = std::isinf(bk) ? 0.0 : fhat.cdf(l / bk);
            return hi - lo;
        };
        double sup = k == 0 ? 1.0 : grid_maximize(gap, u * 1e-6, u, 1024, true).value;
        total += std::max(sup, 0.0) * w;
    }
    return rho / (1.0 - rho * fhat.cdf(u)) * total;
}

double erlangization_bound_a_direct(const Distribution& fhat, int xi, double rho, double u) {
    check_rho(rho);
    require(xi >= 1, "erlangization_bound_a_direct: xi must be at least 1");
    require(u >= 0.0, "erlangization_bound_a_direct: u must be nonnegative");
    if (u == 0.0) return 0.0;
    auto gap = [&](double l) { return std::fabs(fhat.cdf(l) - mellin_star_cdf(fhat, xi, l)); };
    double sup = grid_maximize(gap, u * 1e-6, u, 1024, true).value;
    double f1 = fhat.cdf(u);
    double f2 = std::clamp(mellin_star_cdf(fhat, xi, u), 0.0, 1.0);
    return vatamidou_bound(sup, rho, f1, f2);
}

double discretization_bound_a_formula(double eta, double rho, double fhat_u_delta, double pi_u_delta,
                                      double g_delta) {
    check_rho(rho);
    double d1 = 1.0 - rho * std::min(1.0, fhat_u_delta + g_delta);
    double d2 = 1.0 - rho * std::min(1.0, pi_u_delta + g_delta);
    return eta * (1.0 - rho) * rho / (d1 * d2);
}

DeltaBound discretization_bound_a_search(const Distribution& fhat, const DiscreteScaling& pi, int xi, double rho,
                                         double u) {
    check_rho(rho);
    require(u >= 0.0, "discretization_bound_a: u must be nonnegative");
    if (u == 0.0) return {0.0, 1.0};
    StepDistance dist(fhat, pi);
    auto f = [&](double delta) {
        double g = erlang_cdf(delta, xi);
        double eta = dist.all() * g + dist.up_to(u / delta) * (1.0 - g);
        return discretization_bound_a_formula(eta, rho, fhat.cdf(u / delta), pi.cdf(u / delta), g);
    };
    auto r = grid_minimize(f, 1e-3, 1.0, 64, true);
    return {r.value, r.x};
}

double discretization_bound_a(const Distribution& fhat, const DiscreteScaling& pi, int xi, double rho, double u) {
    return discretization_bound_a_search(fhat, pi, xi, rho, u).value;
}

double erlangization_bound_b_simple(int xi, double rho) {
    check_rho(rho);
    double e = epsilon_m(xi);
    return 2.0 * rho * e / (1.0 - rho * (1.0 - e));
}

double refined_delta1(int xi, double delta2) {
    require(delta2 > 1.0, "refined_delta1: delta2 must exceed 1");
    double target = erlang_integrated_tail_complement(delta2, xi);
    if (target <= 0.0) return 0.0;
    auto h = [&](double d) { return target - epsilon_m_delta(xi, d); };
    if (!(h(0.0) > 0.0 && h(1.0) < 0.0)) throw NoRootError("refined_delta1: balance equation is not bracketed");
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::bisect(h, 0.0, 1.0, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
}

double erlangization_bound_b_refined_formula(double Delta, double H, double rho, int xi, double delta1,
                                             double delta2) {
    check_rho(rho);
    double eps = epsilon_m(xi);
    double c = 1.0 - delta1;
    double d = 1.0 - delta1 - eps + epsilon_m_delta(xi, delta1);
    double e = erlang_integrated_tail(delta2, xi) - erlang_integrated_tail(delta1, xi);
    double t1 = c / (1.0 - rho * H * c) - d / (1.0 - rho * H * d);
    double t2 = 1.0 / (1.0 - rho * c) - 2.0 / (1.0 - rho * d) + 1.0 / (1.0 - rho * e);
    return (1.0 - rho) * rho * Delta * t1 + erlangization_bound_b_simple(xi, rho) - (1.0 - rho) * t2;
}

double erlangization_bound_b_refined(const Distribution& hf, int xi, double rho, double u, double delta2) {
    check_rho(rho);
    require(xi >= 1, "erlangization_bound_b_refined: xi must be at least 1");
    require(u >= 0.0, "erlangization_bound_b_refined: u must be nonnegative");
    double delta1 = refined_delta1(xi, delta2);
    double a = u / delta2;
    double b = delta1 > 0.0 ? u / delta1 : kInf;
    double H = hf.cdf(b);
    double Delta = 0.0;
    if (u > 0.0) {
        auto inc = [&](double c) { return hf.cdf(b - a + c) - hf.cdf(c); };
        Delta = std::isinf(b) ? 1.0 - hf.cdf(0.0) : std::max(0.0, grid_maximize(inc, 0.0, a, 1024, false).value);
    }
    return erlangization_bound_b_refined_formula(Delta, H, rho, xi, delta1, delta2);
}

DeltaBound erlangization_bound_b_refined_search(const Distribution& hf, int xi, double rho, double u,
                                                const std::vector<double>& delta2_grid) {
    DeltaBound best{kInf, 0.0};
    for (double d2 : delta2_grid) {
        double v = erlangization_bound_b_refined(hf, xi, rho, u, d2);
        if (v < best.value) best = {v, d2};
    }
    return best;
}

double discretization_bound_b_formula(double eta, double rho, double hf_u_delta, double hpi_u_delta,
                                      double ghat_delta) {
    check_rho(rho);
    double d1 = 1.0 - rho * std::min(1.0, ghat_delta + hf_u_delta * (1.0 - ghat_delta));
    double d2 = 1.0 - rho * std::min(1.0, ghat_delta + hpi_u_delta * (1.0 - ghat_delta));
    return eta * (1.0 - rho) * rho / (d1 * d2);
}

DeltaBound discretization_bound_b_search(const Distribution& hf, const DiscreteScaling& hpi, int xi, double rho,
                                         double u) {
    check_rho(rho);
    require(u >= 0.0, "discretization_bound_b: u must be nonnegative");
    if (u == 0.0) return {0.0, 1.0};
    StepDistance dist(hf, hpi);
    auto f = [&](double delta) {
        double g = erlang_integrated_tail(delta, xi);
        double eta = dist.all() * g + dist.up_to(u / delta) * (1.0 - g);
        return discretization_bound_b_formula(eta, rho, hf.cdf(u / delta), hpi.cdf(u / delta), g);
    };
    auto r = grid_minimize(f, 1e-3, 100.0, 64, true);
    return {r.value, r.x};
}

double discretization_bound_b(const Distribution& hf, const DiscreteScaling& hpi, int xi, double rho, double u) {
    return discretization_bound_b_search(hf, hpi, xi, rho, u).value;
}

double hf_hpi_bound(const Distribution& f, const DiscreteScaling& pi, double u, Region region) {
    require(u >= 0.0, "hf_hpi_bound: u must be nonnegative");
    double muF = f.mean();
    double muP = pi.mean();
    if (!std::isfinite(muF) || !std::isfinite(muP)) throw InfiniteMeanError("hf_hpi_bound: infinite mean");
    const auto& s = pi.support();
    const auto& p = pi.probs();
    std::size_t N = s.size();
    // K = number of atoms <= u, so s_K <= u < s_{K+1}
    std::size_t K = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), u) - s.begin());
    auto H = [&](double x) { return moment_cdf(f, x); };
    auto jump = [&](std::size_t k) {  // Delta_k H_F, k = 1..N+1 (N+1: beyond the last stored atom)
        double hi = k <= N ? H(s[k - 1]) : 1.0;
        double lo = k >= 2 ? H(s[k - 2]) : 0.0;
        return hi - lo;
    };
    double sup = 0.0;
    if (region == Region::Tail) {
        for (std::size_t k = std::max<std::size_t>(K, 1); k <= N + 1; ++k) sup = std::max(sup, jump(k));
    } else {
        for (std::size_t k = 1; k <= K; ++k) sup = std::max(sup, jump(k));
    }
    double sK = K == 0 ? 0.0 : s[K - 1];
    double s_above = pi.residual_mean(), s_below = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        if (s[j] > u) s_above += p[j] * s[j];
        else s_below += p[j] * s[j];
    }
    double dmu = std::fabs(muP - muF) < 1e-12 ? 0.0 : std::fabs(muP - muF);
    if (region == Region::Tail) {
        double s_above_K = pi.residual_mean();
        for (std::size_t j = 0; j < N; ++j)
            if (s[j] > sK) s_above_K += p[j] * s[j];
        return sup + dmu * s_above / (muP * muF) + std::fabs(f.mean_above(sK) - s_above_K) / muF;
    }
    double x_below = muF - f.mean_above(u);
    return sup + dmu * s_below / (muP * muF) + std::fabs(s_below - x_below) / muF;
}

double chernoff_tail(double lambda, long N1) {
    require(lambda > 0.0, "chernoff_tail: lambda must be positive");
    require(N1 >= 0, "chernoff_tail: N1 must be nonnegative");
    double m = static_cast<double>(N1) + 1.0;
    double lg = -lambda + m * (1.0 + std::log(lambda) - std::log(m));
    return std::exp(lg);
}

double poisson_tail_bound(double lambda, long N1) {
    if (lambda == 0.0) return 0.0;
    double c = chernoff_tail(lambda, N1);
    double exact = boost::math::gamma_p(static_cast<double>(N1) + 1.0, lambda);
    return std::min({1.0, c, exact});
}

double truncation_bound_a(double eps1, double rho, int xi, double u, double s1, long N1) {
    check_rho(rho);
    require(eps1 >= 0.0, "truncation_bound_a: eps1 must be nonnegative");
    require(xi >= 1 && s1 > 0.0 && u >= 0.0, "truncation_bound_a: invalid xi, s1 or u");
    double lambda = xi * u / s1;
    double main = eps1 * (rho / (1.0 - rho) * lambda + 2.0 / ((1.0 - rho) * (1.0 - rho)) * std::exp(-(1.0 - rho) * lambda));
    return main + poisson_tail_bound(lambda, N1);
}

double truncation_bound_b(double eps2, double rho, int xi, double u, double s1, double mu_pi, long N1) {
    check_rho(rho);
    if (!std::isfinite(eps2)) throw InfiniteMeanError("truncation_bound_b: residual mean is infinite");
    require(eps2 >= 0.0, "truncation_bound_b: eps2 must be nonnegative");
    require(xi >= 1 && s1 > 0.0 && u >= 0.0 && mu_pi > 0.0, "truncation_bound_b: invalid arguments");
    double lambda = xi * u / s1;
    double main = 0.0;
    if (eps2 > 0.0) main = std::exp(std::log(eps2) + lambda * rho / mu_pi - xi * std::log1p(rho / mu_pi));
    return main + poisson_tail_bound(lambda, N1);
}

}  // namespace esm
