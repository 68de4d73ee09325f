#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace esm {

struct Extremum {
    double x = std::numeric_limits<double>::quiet_NaN();
    double value = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<double> make_grid(double lo, double hi, int n, bool log_spaced) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    if (n == 1) {
        xs[0] = lo;
        return xs;
    }
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / (n - 1);
        xs[i] = log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
    }
    xs.back() = hi;
    return xs;
}

// Grid seed followed by Brent (golden-section/parabolic) refinement around the best grid point.
// Non-finite values count as inadmissible. Ties keep the smallest x.
template <class F>
Extremum grid_minimize(F&& f, double lo, double hi, int n, bool log_spaced) {
    auto xs = make_grid(lo, hi, n, log_spaced);
    Extremum best;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = f(xs[i]);
        if (!std::isfinite(v)) continue;
        if (!(best.value <= v)) {
            best = {xs[i], v};
            arg = i;
        }
    }
    if (!std::isfinite(best.value) || xs.size() < 3) return best;
    double a = xs[arg == 0 ? 0 : arg - 1];
    double b = xs[arg + 1 < xs.size() ? arg + 1 : arg];
    if (!(a < b)) return best;
    auto g = [&](double x) {
        double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    std::uintmax_t iters = 100;
    auto r = boost::math::tools::brent_find_minima(g, a, b, 40, iters);
    if (r.second < best.value) best = {r.first, r.second};
    return best;
}

template <class F>
Extremum grid_maximize(F&& f, double lo, double hi, int n, bool log_spaced) {
    auto r = grid_minimize([&](double x) { return -f(x); }, lo, hi, n, log_spaced);
    r.value = -r.value;
    return r;
}

}  // namespace esm
