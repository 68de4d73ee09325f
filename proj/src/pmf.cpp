#include "esmruin/pmf.hpp"

#include <array>
#include <cmath>

#include "esmruin/errors.hpp"

namespace esm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
constexpr double kTwoPi = 6.283185307179586476925;

// stirlerr(n) = log(n!) - log(sqrt(2 pi n) (n/e)^n) for n = 0..15, evaluated in extended precision.
const std::array<double, 16>& small_stirlerr() {
    static const std::array<double, 16> table = [] {
        std::array<double, 16> t{};
        t[0] = 0.0;
        for (int n = 1; n < 16; ++n) {
            long double ln = static_cast<long double>(n);
            t[n] = static_cast<double>(lgammal(ln + 1.0L) - (ln + 0.5L) * logl(ln) + ln -
                                       0.5L * 1.8378770664093454835606594728112353L);
        }
        return t;
    }();
    return table;
}

}  // namespace

double stirlerr(double n) {
    constexpr double S0 = 1.0 / 12.0;
    constexpr double S1 = 1.0 / 360.0;
    constexpr double S2 = 1.0 / 1260.0;
    constexpr double S3 = 1.0 / 1680.0;
    constexpr double S4 = 1.0 / 1188.0;
    if (n < 16.0 && n == std::floor(n)) return small_stirlerr()[static_cast<int>(n)];
    if (n < 16.0) return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * kLog2Pi;
    double n1 = 1.0 / n;
    double n2 = n1 * n1;
    if (n > 500) return (S0 - S1 * n2) * n1;
    if (n > 80) return (S0 - (S1 - S2 * n2) * n2) * n1;
    if (n > 35) return (S0 - (S1 - (S2 - S3 * n2) * n2) * n2) * n1;
    return (S0 - (S1 - (S2 - (S3 - S4 * n2) * n2) * n2) * n2) * n1;
}

double bd0(double x, double np) {
    if (std::fabs(x - np) < 0.1 * (x + np)) {
        double v = (x - np) / (x + np);
        double s = (x - np) * v;
        double ej = 2 * x * v;
        v *= v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v;
            double s1 = s + ej / (2 * j + 1);
            if (s1 == s) return s1;
            s = s1;
        }
        return s;
    }
    return x * std::log(x / np) + np - x;
}

double binom_pmf(std::int64_t k, std::int64_t n, double p) {
    require(n >= 0, "binom_pmf: n must be nonnegative");
    require(k >= 0 && k <= n, "binom_pmf: k must lie in [0, n]");
    require(p >= 0.0 && p <= 1.0, "binom_pmf: p must lie in [0, 1]");
    double q = 1.0 - p;
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (q == 0.0) return k == n ? 1.0 : 0.0;
    double dn = static_cast<double>(n);
    if (k == 0) {
        if (n == 0) return 1.0;
        double lc = p < 0.1 ? -bd0(dn, dn * q) - dn * p : dn * std::log(q);
        return std::exp(lc);
    }
    if (k == n) {
        double lc = q < 0.1 ? -bd0(dn, dn * p) - dn * q : dn * std::log(p);
        return std::exp(lc);
    }
    double x = static_cast<double>(k);
    double lc = stirlerr(dn) - stirlerr(x) - stirlerr(dn - x) - bd0(x, dn * p) - bd0(dn - x, dn * q);
    double lf = kLog2Pi + std::log(x) + std::log1p(-x / dn);
    return std::exp(lc - 0.5 * lf);
}

namespace {

// Sums pmf terms walking away from the centre starting at k (inclusive), downward or upward.
double binom_tail_sum(std::int64_t k, std::int64_t n, double p, bool down) {
    double q = 1.0 - p;
    double term = binom_pmf(k, n, p);
    double sum = 0.0;
    std::int64_t x = k;
    int since_anchor = 0;
    while (true) {
        sum += term;
        if (down) {
            if (x == 0) break;
            term *= static_cast<double>(x) / static_cast<double>(n - x + 1) * (q / p);
            --x;
        } else {
            if (x == n) break;
            term *= static_cast<double>(n - x) / static_cast<double>(x + 1) * (p / q);
            ++x;
        }
        if (++since_anchor == 64) {
            term = binom_pmf(x, n, p);
            since_anchor = 0;
        }
        if (term <= sum * 1e-18) break;
    }
    return sum;
}

}  // namespace

double binom_cdf(std::int64_t k, std::int64_t n, double p) {
    require(n >= 0, "binom_cdf: n must be nonnegative");
    require(k >= 0 && k <= n, "binom_cdf: k must lie in [0, n]");
    require(p >= 0.0 && p <= 1.0, "binom_cdf: p must lie in [0, 1]");
    if (k == n || p == 0.0) return 1.0;
    if (p == 1.0) return 0.0;
    double mean = static_cast<double>(n) * p;
    if (static_cast<double>(k) < mean) return binom_tail_sum(k, n, p, true);
    return 1.0 - binom_tail_sum(k + 1, n, p, false);
}

double binom_sf(std::int64_t k, std::int64_t n, double p) {
    require(n >= 0, "binom_sf: n must be nonnegative");
    require(k >= 0 && k <= n, "binom_sf: k must lie in [0, n]");
    require(p >= 0.0 && p <= 1.0, "binom_sf: p must lie in [0, 1]");
    if (k == n || p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    double mean = static_cast<double>(n) * p;
    if (static_cast<double>(k + 1) > mean) return binom_tail_sum(k + 1, n, p, false);
    return 1.0 - binom_tail_sum(k, n, p, true);
}

double pois_pmf(std::int64_t k, double lambda) {
    require(lambda >= 0.0, "pois_pmf: lambda must be nonnegative");
    if (k < 0) return 0.0;
    if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
    if (k == 0) return std::exp(-lambda);
    double x = static_cast<double>(k);
    return std::exp(-stirlerr(x) - bd0(x, lambda)) / std::sqrt(kTwoPi * x);
}

double pois_shortfall(std::int64_t c, double lambda) {
    require(lambda >= 0.0 && c >= 0, "pois_shortfall: invalid arguments");
    if (c == 0) return 0.0;
    if (lambda == 0.0) return static_cast<double>(c);
    double sum = 0.0;
    std::int64_t n = c - 1;
    double term = pois_pmf(n, lambda);
    int since_anchor = 0;
    while (true) {
        double w = static_cast<double>(c - n) * term;
        sum += w;
        if (n == 0) break;
        if (static_cast<double>(n) < lambda && w <= sum * 1e-18) break;
        term *= static_cast<double>(n) / lambda;
        --n;
        if (++since_anchor == 64) {
            term = pois_pmf(n, lambda);
            since_anchor = 0;
        }
    }
    return sum;
}

double pois_excess(std::int64_t c, double lambda) {
    require(lambda >= 0.0 && c >= 0, "pois_excess: invalid arguments");
    double dc = static_cast<double>(c);
    if (lambda > dc) return (lambda - dc) + pois_shortfall(c, lambda);
    if (lambda == 0.0) return 0.0;
    double sum = 0.0;
    std::int64_t n = c + 1;
    double term = pois_pmf(n, lambda);
    int since_anchor = 0;
    while (true) {
        double w = static_cast<double>(n - c) * term;
        sum += w;
        if (static_cast<double>(n) > lambda && w <= sum * 1e-18) break;
        if (term == 0.0) break;
        term *= lambda / static_cast<double>(n + 1);
        ++n;
        if (++since_anchor == 64) {
            term = pois_pmf(n, lambda);
            since_anchor = 0;
        }
    }
    return sum;
}

}  // namespace esm
