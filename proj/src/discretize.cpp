#include "esmruin/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esmruin/csv.hpp"
#include "esmruin/errors.hpp"

namespace esm {

Mode parse_mode(const std::string& name) {
    if (name == "above") return Mode::Above;
    if (name == "below") return Mode::Below;
    if (name == "middle") return Mode::Middle;
    if (name == "arith-middle") return Mode::ArithMiddle;
    throw DomainError("unknown discretization mode '" + name + "' (expected above, below, middle, arith-middle)");
}

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::Above: return "above";
        case Mode::Below: return "below";
        case Mode::Middle: return "middle";
        case Mode::ArithMiddle: return "arith-middle";
    }
    return "?";
}

GeometricGrid::GeometricGrid(double t0_, int K_, int N2_) : t0(t0_), K(K_), N2(N2_) {
    require(std::isfinite(t0), "GeometricGrid: t0 must be finite");
    require(K >= 1, "GeometricGrid: K must be positive");
    require(N2 >= 1, "GeometricGrid: N2 must be positive");
}

double GeometricGrid::s(long j) const { return std::exp(t0 + static_cast<double>(j - 1) / K); }

double GeometricGrid::w(long j, Mode mode) const {
    if (j <= 0) return 0.0;
    switch (mode) {
        case Mode::Below: return s(j);
        case Mode::Above: return s(j + 1);
        case Mode::Middle: return std::exp(t0 + (static_cast<double>(j) - 0.5) / K);
        case Mode::ArithMiddle: return 0.5 * (s(j) + s(j + 1));
    }
    return s(j);
}

namespace {

// Largest s_j / x for x in the cell that is mapped onto atom j.
double cell_ratio(Mode mode, int K) {
    switch (mode) {
        case Mode::Below: return std::exp(1.0 / K);
        case Mode::Above: return 1.0;
        case Mode::Middle: return std::exp(0.5 / K);
        case Mode::ArithMiddle: return 2.0 / (1.0 + std::exp(-1.0 / K));
    }
    return std::exp(1.0 / K);
}

}  // namespace

DiscreteScaling::DiscreteScaling(std::vector<double> support, std::vector<double> probs, double residual_mass,
                                 double residual_mean)
    : support_(std::move(support)), probs_(std::move(probs)), eps1_(residual_mass), eps2_(residual_mean) {
    require(!support_.empty(), "DiscreteScaling: no atoms");
    require(support_.size() == probs_.size(), "DiscreteScaling: support and probs differ in length");
    require(residual_mass >= 0.0, "DiscreteScaling: residual mass must be nonnegative");
    require(residual_mean >= 0.0, "DiscreteScaling: residual mean must be nonnegative");
    cumulative_.resize(probs_.size());
    double c = 0.0, comp = 0.0, m = 0.0;
    for (std::size_t j = 0; j < probs_.size(); ++j) {
        require(support_[j] > 0.0, "DiscreteScaling: support must be positive");
        if (j > 0) require(support_[j] > support_[j - 1], "DiscreteScaling: support must be strictly increasing");
        require(probs_[j] >= 0.0, "DiscreteScaling: probabilities must be nonnegative");
        double y = probs_[j] - comp;
        double t = c + y;
        comp = (t - c) - y;
        c = t;
        cumulative_[j] = c;
        m += probs_[j] * support_[j];
    }
    stored_mean_ = m;
}

double DiscreteScaling::cdf(double s) const {
    auto it = std::upper_bound(support_.begin(), support_.end(), s);
    if (it == support_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

std::string DiscreteScaling::to_csv() const {
    std::string out = "index,s,pi\n";
    for (std::size_t j = 0; j < support_.size(); ++j)
        out += csv_row({std::to_string(j + 1), fmt12(support_[j]), fmt12(probs_[j])});
    return out;
}

DiscreteScaling build_scaling(const Distribution& target, const GeometricGrid& grid, Mode mode) {
    std::vector<double> support, probs;
    support.reserve(static_cast<std::size_t>(grid.N2));
    probs.reserve(static_cast<std::size_t>(grid.N2));
    double prev_cdf = 0.0, prev_sf = 1.0;
    for (long j = 1; j <= grid.N2; ++j) {
        double w = grid.w(j, mode);
        double c = target.cdf(w);
        double sf = target.sf(w);
        // difference the smaller of cdf/sf to keep relative accuracy in both tails
        double p = c < 0.5 ? c - prev_cdf : prev_sf - sf;
        prev_cdf = c;
        prev_sf = sf;
        if (p <= 0.0) continue;
        support.push_back(grid.s(j));
        probs.push_back(p);
    }
    require(!support.empty(), "build_scaling: target puts no mass on the grid");
    double w_last = grid.w(grid.N2, mode);
    double eps1 = target.sf(w_last);
    double eps2 = std::numeric_limits<double>::infinity();
    if (std::isfinite(target.mean())) eps2 = eps1 == 0.0 ? 0.0 : cell_ratio(mode, grid.K) * target.mean_above(w_last);
    return DiscreteScaling(std::move(support), std::move(probs), eps1, eps2);
}

int select_n2(const Distribution& target, double t0, int K, Mode mode, double eps1_target) {
    require(eps1_target > 0.0 && eps1_target < 1.0, "select_n2: eps1 target must lie in (0, 1)");
    GeometricGrid g(t0, K, 1);
    auto ok = [&](long n) { return target.sf(g.w(n, mode)) < eps1_target; };
    long hi = 1;
    while (!ok(hi)) {
        hi *= 2;
        if (hi > (1L << 30)) throw NoRootError("select_n2: residual mass never falls below the target");
    }
    long lo = hi / 2;  // !ok(lo) unless lo == 0
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        if (ok(mid)) hi = mid;
        else lo = mid;
    }
    return static_cast<int>(hi);
}

DiscreteScaling moment_scaling(const DiscreteScaling& pi) {
    double mu = pi.mean();
    if (!std::isfinite(mu)) throw InfiniteMeanError("moment_scaling: scaling mean is infinite");
    std::vector<double> probs(pi.size());
    for (std::size_t j = 0; j < pi.size(); ++j) probs[j] = pi.probs()[j] * pi.support()[j] / mu;
    return DiscreteScaling(pi.support(), std::move(probs), pi.residual_mean() / mu,
                           std::numeric_limits<double>::infinity());
}

double sup_diff_step(const Distribution& target, const DiscreteScaling& pi, double lo, double hi) {
    require(lo >= 0.0 && lo <= hi, "sup_diff_step: need 0 <= lo <= hi");
    const auto& s = pi.support();
    const auto& c = pi.cumulative();
    double best = std::fabs(target.cdf(lo) - pi.cdf(lo));
    if (lo == hi) return best;
    auto j = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), lo) - s.begin());
    for (; j < s.size() && s[j] <= hi; ++j) {
        double t = target.cdf(s[j]);
        double left = j == 0 ? 0.0 : c[j - 1];
        best = std::max({best, std::fabs(t - left), std::fabs(t - c[j])});
    }
    if (std::isinf(hi)) best = std::max(best, std::fabs(1.0 - pi.stored_mass()));
    else best = std::max(best, std::fabs(target.cdf(hi) - pi.cdf(hi)));
    return best;
}

}  // namespace esm
