#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "esmruin/errors.hpp"

namespace esm {

struct QuadOptions {
    double abs_tol = 1e-12;
    double rel_tol = 0.0;
    int max_subdivisions = 60;
};

namespace detail {

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk21(F& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    static const auto& xk = GK::abscissa();
    static const auto& wk = GK::weights();
    static const auto& wg = boost::math::quadrature::gauss<double, 10>::weights();
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double kron = wk[0] * fc;
    double gauss = 0.0;  // the embedded 10-point Gauss rule uses the odd-indexed nodes
    for (std::size_t i = 1; i < xk.size(); ++i) {
        double fl = f(c - h * xk[i]);
        double fr = f(c + h * xk[i]);
        kron += wk[i] * (fl + fr);
        if (i % 2 == 1) gauss += wg[i / 2] * (fl + fr);
    }
    return {a, b, kron * h, std::fabs((kron - gauss) * h)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (10/21) over breakpoints[0] < ... < breakpoints.back();
// the last breakpoint may be +infinity.
template <class F>
double integrate(F&& f, std::vector<double> breakpoints, QuadOptions opt = {}) {
    require(breakpoints.size() >= 2, "integrate: need at least two breakpoints");
    auto g = [&](double x) { return static_cast<double>(f(x)); };
    double upper = breakpoints.back();
    bool infinite = std::isinf(upper);
    double last_finite = infinite ? breakpoints[breakpoints.size() - 2] : upper;
    // tail [last_finite, inf) mapped to t in [0, 1): x = last_finite + t / (1 - t)
    auto tail = [&](double t) {
        double om = 1.0 - t;
        return g(last_finite + t / om) / (om * om);
    };
    std::priority_queue<detail::Panel> heap;
    double total = 0.0, err = 0.0;
    std::size_t finite_panels = breakpoints.size() - (infinite ? 2 : 1);
    std::vector<detail::Panel> panels;
    for (std::size_t i = 0; i < finite_panels; ++i) {
        if (breakpoints[i + 1] <= breakpoints[i]) continue;
        panels.push_back(detail::gk21(g, breakpoints[i], breakpoints[i + 1]));
    }
    std::priority_queue<detail::Panel> tail_heap;
    if (infinite) tail_heap.push(detail::gk21(tail, 0.0, 1.0));
    for (auto& p : panels) heap.push(p);

    auto sums = [&] {
        total = 0.0;
        err = 0.0;
        auto h = heap;
        while (!h.empty()) {
            total += h.top().value;
            err += h.top().error;
            h.pop();
        }
        auto t = tail_heap;
        while (!t.empty()) {
            total += t.top().value;
            err += t.top().error;
            t.pop();
        }
    };
    sums();
    for (int it = 0; it <= opt.max_subdivisions; ++it) {
        double tol = std::max(opt.abs_tol, opt.rel_tol * std::fabs(total));
        if (err <= tol) return total;
        if (it == opt.max_subdivisions) break;
        bool use_tail = !tail_heap.empty() && (heap.empty() || tail_heap.top().error > heap.top().error);
        auto& q = use_tail ? tail_heap : heap;
        detail::Panel worst = q.top();
        q.pop();
        double mid = 0.5 * (worst.a + worst.b);
        detail::Panel l = use_tail ? detail::gk21(tail, worst.a, mid) : detail::gk21(g, worst.a, mid);
        detail::Panel r = use_tail ? detail::gk21(tail, mid, worst.b) : detail::gk21(g, mid, worst.b);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        q.push(l);
        q.push(r);
        if (it % 16 == 15) sums();
    }
    throw NonConvergentQuadrature("integrate: tolerance " + std::to_string(opt.abs_tol) +
                                  " not met, error estimate " + std::to_string(err));
}

template <class F>
double integrate(F&& f, double a, double b, QuadOptions opt = {}) {
    return integrate(std::forward<F>(f), std::vector<double>{a, b}, opt);
}

}  // namespace esm
