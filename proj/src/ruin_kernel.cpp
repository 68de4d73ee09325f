#include "esmruin/ruin_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esmruin/error_bounds.hpp"
#include "esmruin/errors.hpp"
#include "esmruin/parallel.hpp"

namespace esm {

RiskModel::RiskModel(double rho_, double mu_F_) : rho(rho_), mu_F(mu_F_), gamma(rho_ / mu_F_) {
    require(mu_F_ > 0.0 && std::isfinite(mu_F_), "RiskModel: mu_F must be positive and finite");
    require(rho_ > 0.0 && rho_ < 1.0, "RiskModel: rho must lie in (0, 1) (net profit condition)");
}

double coeff_B_atom(long i, double p, int xi) {
    long k = xi - 1;
    if (i < k) return 0.0;
    return p * binom_pmf(k, i, p);
}

double coeff_B_atom_truncated(long i, double p, int xi) {
    if (i < xi - 1) return 0.0;
    return static_cast<double>(xi) / static_cast<double>(i + 1) * binom_pmf(xi, i + 1, p);
}

double coeff_B(long i, const DiscreteScaling& pi, int xi) {
    require(xi >= 1 && i >= 0, "coeff_B: need xi >= 1 and i >= 0");
    if (i < xi - 1) return 0.0;
    double s1 = pi.s1(), sum = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        double p = s1 / pi.support()[j];
        double b = coeff_B_atom(i, p, xi);
        double bt = coeff_B_atom_truncated(i, p, xi);
        if (std::fabs(b - bt) > 1e-10 * std::max(b, bt) + 1e-300)
            throw std::logic_error("coeff_B: binomial forms disagree");
        sum += pi.probs()[j] * b;
    }
    return sum;
}

double coeff_B_truncated(long i, const DiscreteScaling& pi, int xi) {
    require(xi >= 1 && i >= 0, "coeff_B_truncated: need xi >= 1 and i >= 0");
    double s1 = pi.s1(), sum = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) sum += pi.probs()[j] * coeff_B_atom_truncated(i, s1 / pi.support()[j], xi);
    return sum;
}

double coeff_C(long n, const DiscreteScaling& pi, int xi) {
    require(xi >= 1 && n >= 0, "coeff_C: need xi >= 1 and n >= 0");
    long k = xi - 1;
    if (n <= k) return pi.stored_mass();
    double s1 = pi.s1(), sum = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) sum += pi.probs()[j] * binom_cdf(k, n, s1 / pi.support()[j]);
    return sum;
}

double coeff_D(long n, const DiscreteScaling& pi, int xi) {
    require(xi >= 1 && n >= 0, "coeff_D: need xi >= 1 and n >= 0");
    if (!std::isfinite(pi.residual_mean())) throw InfiniteMeanError("coeff_D: scaling law has infinite mean");
    double s1 = pi.s1(), sum = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        double p = s1 / pi.support()[j], w = pi.probs()[j] * pi.support()[j];
        if (n <= xi) {
            sum += w * (1.0 - static_cast<double>(n) / xi * p);
            continue;
        }
        double inner = 0.0;
        for (long k = 0; k < xi; ++k) inner += static_cast<double>(xi - k) / xi * binom_pmf(k, n, p);
        sum += w * inner;
    }
    return sum;
}

namespace {

constexpr double kTailCut = 1e-18;
constexpr std::size_t kChunkAtoms = 64;
constexpr std::size_t kWaveChunks = 16;

// f_l = bin(k; l, p) for l in [lo, hi], walked outward from the mode and clipped at N1.
// seed1/seed2 are the suffix sums past hi: Bin(k; hi+1, p) and E[(k+1 - X_{hi+1})^+].
struct AtomWindow {
    long lo = 0, hi = 0;
    std::vector<double> f;
    double seed1 = 0.0, seed2 = 0.0;
    double discarded = 0.0;
};

AtomWindow nb_window(double p, long k, long N1) {
    AtomWindow w;
    if (p >= 1.0) {
        w.lo = w.hi = k;
        w.f = {1.0};
        return w;
    }
    double q = 1.0 - p;
    double mode_d = std::max(static_cast<double>(k), std::floor(static_cast<double>(k) / p));
    long anchor = std::max(k, mode_d > static_cast<double>(N1) ? N1 : static_cast<long>(mode_d));
    double fm = binom_pmf(k, anchor, p);

    std::vector<double> right;
    double f = fm;
    long l = anchor;
    int since = 0;
    bool clipped = true;
    while (l < N1) {
        double r = static_cast<double>(l + 1) * q / static_cast<double>(l + 1 - k);
        double tail = r < 1.0 ? p * f * r / (1.0 - r) : std::numeric_limits<double>::infinity();
        if (tail < kTailCut) {
            w.discarded += tail;
            clipped = false;
            break;
        }
        ++l;
        f *= r;
        if (++since == 64) {
            f = binom_pmf(k, l, p);
            since = 0;
        }
        right.push_back(f);
    }
    w.hi = l;
    if (clipped) {
        std::int64_t m = l + 1;
        w.seed1 = binom_cdf(k, m, p);
        double s2 = 0.0;
        for (long i = 0; i <= k; ++i) s2 += static_cast<double>(k + 1 - i) * binom_pmf(i, m, p);
        w.seed2 = s2;
    }

    std::vector<double> left;
    f = fm;
    l = anchor;
    since = 0;
    while (l > k) {
        double r = static_cast<double>(l - k) / (static_cast<double>(l) * q);
        if (r < 1.0 && p * f * r / (1.0 - r) < kTailCut) {
            w.discarded += p * f * r / (1.0 - r);
            break;
        }
        --l;
        f *= r;
        if (++since == 64) {
            f = binom_pmf(k, l, p);
            since = 0;
        }
        left.push_back(f);
    }
    w.lo = l;
    w.f.reserve(left.size() + 1 + right.size());
    w.f.assign(left.rbegin(), left.rend());
    w.f.push_back(fm);
    w.f.insert(w.f.end(), right.begin(), right.end());
    return w;
}

// Contributions of a run of atoms: explicit values on [offset, offset + len) plus, for every
// atom, constant/linear terms that apply to all n below the atom's window.
struct ChunkPart {
    long offset = 0;
    std::vector<double> B, C, D;
    struct Below {
        long lo;       // applies to n < lo (already clipped to N1 + 1)
        double c;      // added to C_n
        double a, b;   // added to D_n as a - n b
    };
    std::vector<Below> below;
    double discarded = 0.0;
};

ChunkPart sweep_chunk(const DiscreteScaling& pi, std::size_t j0, std::size_t j1, int xi, long N1, bool with_D) {
    ChunkPart part;
    long k = xi - 1;
    double s1 = pi.s1();
    std::vector<AtomWindow> wins;
    wins.reserve(j1 - j0);
    long lo_all = std::numeric_limits<long>::max(), hi_all = -1;
    for (std::size_t j = j0; j < j1; ++j) {
        wins.push_back(nb_window(s1 / pi.support()[j], k, std::max(N1, k)));
        lo_all = std::min(lo_all, wins.back().lo);
        hi_all = std::max(hi_all, std::min(wins.back().hi, N1));
    }
    part.offset = lo_all;
    std::size_t len = hi_all >= lo_all ? static_cast<std::size_t>(hi_all - lo_all + 1) : 0;
    part.B.assign(len, 0.0);
    part.C.assign(len, 0.0);
    if (with_D) part.D.assign(len, 0.0);

    std::vector<double> t1, t2;
    for (std::size_t a = 0; a < wins.size(); ++a) {
        const auto& w = wins[a];
        std::size_t j = j0 + a;
        double prob = pi.probs()[j], s = pi.support()[j], p = s1 / s;
        std::size_t L = w.f.size();
        t1.assign(L, 0.0);
        t2.assign(L, 0.0);
        double acc1 = w.seed1, acc2 = w.seed2;
        for (std::size_t t = L; t-- > 0;) {
            acc1 += p * w.f[t];
            t1[t] = acc1;
            acc2 += p * acc1;
            t2[t] = acc2;
        }
        part.discarded += prob * w.discarded;
        for (long n = w.lo; n <= std::min(w.hi, N1); ++n) {
            std::size_t t = static_cast<std::size_t>(n - w.lo);
            std::size_t o = static_cast<std::size_t>(n - lo_all);
            part.B[o] += prob * p * w.f[t];
            part.C[o] += prob * t1[t];
            if (with_D) part.D[o] += prob * s * t2[t] / xi;
        }
        double T1 = t1[0], T2 = t2[0];
        ChunkPart::Below bl;
        bl.lo = std::min(w.lo, N1 + 1);
        bl.c = prob * T1;
        bl.a = prob * (s * T2 + s1 * T1 * static_cast<double>(w.lo)) / xi;
        bl.b = prob * s1 * T1 / xi;
        part.below.push_back(bl);
    }
    return part;
}

}  // namespace

CoefficientTable build_coefficients(const DiscreteScaling& pi, int xi, long N1, bool with_D, int threads) {
    require(xi >= 1, "build_coefficients: xi must be at least 1");
    require(N1 >= 0, "build_coefficients: N1 must be nonnegative");
    if (with_D && !std::isfinite(pi.residual_mean()))
        throw InfiniteMeanError("build_coefficients: scaling law has infinite mean");
    CoefficientTable tab;
    tab.xi = xi;
    tab.N1 = N1;
    std::size_t n = static_cast<std::size_t>(N1) + 1;
    tab.B.assign(n, 0.0);
    tab.C.assign(n, 0.0);
    if (with_D) tab.D.assign(n, 0.0);
    long k = xi - 1;
    double s1 = pi.s1();

    // atoms whose binomial cdf is still 1 (to 1e-18) at N1 are handled in closed form
    std::size_t j_far = 0;
    auto sf_at_N1 = [&](std::size_t j) { return N1 < xi ? 0.0 : binom_sf(k, N1, s1 / pi.support()[j]); };
    while (j_far < pi.size() && sf_at_N1(j_far) > kTailCut) ++j_far;

    std::vector<double> EC(n + 1, 0.0), EA(n + 1, 0.0), EB(n + 1, 0.0);
    std::size_t chunks = (j_far + kChunkAtoms - 1) / kChunkAtoms;
    for (std::size_t wave = 0; wave < chunks; wave += kWaveChunks) {
        std::size_t wn = std::min(kWaveChunks, chunks - wave);
        std::vector<ChunkPart> parts(wn);
        parallel_for(wn, threads, [&](std::size_t c) {
            std::size_t j0 = (wave + c) * kChunkAtoms;
            std::size_t j1 = std::min(j_far, j0 + kChunkAtoms);
            parts[c] = sweep_chunk(pi, j0, j1, xi, N1, with_D);
        });
        for (auto& part : parts) {
            for (std::size_t o = 0; o < part.B.size(); ++o) {
                std::size_t idx = static_cast<std::size_t>(part.offset) + o;
                tab.B[idx] += part.B[o];
                tab.C[idx] += part.C[o];
                if (with_D) tab.D[idx] += part.D[o];
            }
            for (const auto& bl : part.below) {
                if (bl.lo <= 0) continue;
                std::size_t idx = static_cast<std::size_t>(bl.lo) - 1;
                EC[idx] += bl.c;
                EA[idx] += bl.a;
                EB[idx] += bl.b;
            }
            tab.discarded_mass += part.discarded;
        }
    }

    double far_mass = 0.0, far_mean = 0.0;
    for (std::size_t j = j_far; j < pi.size(); ++j) {
        far_mass += pi.probs()[j];
        far_mean += pi.probs()[j] * pi.support()[j];
    }
    for (std::size_t j = j_far; j < pi.size(); ++j) {
        double sf = sf_at_N1(j);
        if (sf == 0.0) break;
        tab.discarded_mass += pi.probs()[j] * sf;
    }

    double sc = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        sc += EC[i];
        sa += EA[i];
        sb += EB[i];
        double dn = static_cast<double>(i);
        tab.C[i] += sc + far_mass;
        if (with_D) tab.D[i] += (sa - dn * sb) + (far_mean - dn * s1 * far_mass / xi);
    }
    return tab;
}

double dot_compensated(const double* a, const double* b, std::size_t n) {
    constexpr std::size_t kBlock = 512;
    double sum = 0.0, comp = 0.0;
    for (std::size_t start = 0; start < n; start += kBlock) {
        std::size_t end = std::min(n, start + kBlock);
        double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        std::size_t t = start;
        for (; t + 8 <= end; t += 8)
            for (int q = 0; q < 8; ++q) acc[q] += a[t + q] * b[t + q];
        double block = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
        for (; t < end; ++t) block += a[t] * b[t];
        double y = block - comp;
        double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum;
}

KappaSeries kappa_a(const CoefficientTable& tab, double s1, const RiskModel& model, int threads) {
    long N1 = tab.N1;
    int xi = tab.xi;
    double rho = model.rho;
    KappaSeries ks;
    ks.variant = Variant::A;
    ks.xi = xi;
    ks.s1 = s1;
    ks.intensity = rho;
    std::size_t n_all = static_cast<std::size_t>(N1) + 1;
    ks.coeffs.assign(n_all, rho);
    // reversed B so every convolution is an ascending dot product
    std::vector<double> brev(n_all);
    for (std::size_t x = 0; x < n_all; ++x) brev[x] = tab.B[n_all - 1 - x];
    double* kap = ks.coeffs.data();
    for (long b = xi; b <= N1; b += xi) {
        long e = std::min(N1 + 1, b + static_cast<long>(xi));
        parallel_for(static_cast<std::size_t>(e - b), threads, [&](std::size_t t) {
            long n = b + static_cast<long>(t);
            std::size_t len = static_cast<std::size_t>(n - xi + 1);
            std::size_t off = static_cast<std::size_t>(N1 - n + 1);
            kap[n] = rho * (dot_compensated(kap, brev.data() + off, len) + tab.C[static_cast<std::size_t>(n)]);
        });
    }
    return ks;
}

KappaSeries kappa_a(const DiscreteScaling& pi, int xi, const RiskModel& model, long N1, int threads) {
    auto tab = build_coefficients(pi, xi, N1, false, threads);
    return kappa_a(tab, pi.s1(), model, threads);
}

KappaSeries kappa_b(const CoefficientTable& tab, double s1, double mu_pi, const RiskModel& model, int threads) {
    require(std::isfinite(mu_pi) && mu_pi > 0.0, "kappa_b: scaling mean must be positive and finite");
    require(!tab.D.empty() || tab.N1 <= tab.xi, "kappa_b: coefficient table lacks D");
    long N1 = tab.N1;
    int xi = tab.xi;
    double rho = model.rho;
    KappaSeries ks;
    ks.variant = Variant::B;
    ks.xi = xi;
    ks.s1 = s1;
    ks.intensity = rho / mu_pi;
    std::size_t n_all = static_cast<std::size_t>(N1) + 1;
    ks.coeffs.assign(n_all, 0.0);
    double* kap = ks.coeffs.data();
    kap[0] = rho;
    double growth = 1.0 + rho * s1 / (mu_pi * xi);
    for (long n = 1; n <= std::min<long>(N1, xi); ++n) kap[n] = (rho - 1.0) * std::pow(growth, static_cast<double>(n)) + 1.0;
    double a = rho * s1 / (mu_pi * xi);
    double d = rho / mu_pi;
    std::vector<double> crev(n_all);
    for (std::size_t x = 0; x < n_all; ++x) crev[x] = tab.C[n_all - 1 - x];
    std::vector<double> far(static_cast<std::size_t>(xi));
    for (long b = xi + 1; b <= N1; b += xi) {
        long e = std::min(N1 + 1, b + static_cast<long>(xi));
        // i >= xi part: kappa_m with m <= n - 1 - xi, all known before the block
        parallel_for(static_cast<std::size_t>(e - b), threads, [&](std::size_t t) {
            long n = b + static_cast<long>(t);
            std::size_t len = static_cast<std::size_t>(n - xi);
            std::size_t off = static_cast<std::size_t>(N1 - n + 1);
            far[t] = dot_compensated(kap, crev.data() + off, len);
        });
        for (long n = b; n < e; ++n) {
            double recent = 0.0;
            for (long i = xi - 1; i >= 0; --i) recent += kap[n - 1 - i] * tab.C[static_cast<std::size_t>(i)];
            kap[n] = a * (far[static_cast<std::size_t>(n - b)] + recent) + d * tab.D[static_cast<std::size_t>(n)];
        }
    }
    return ks;
}

KappaSeries kappa_b(const DiscreteScaling& pi, int xi, const RiskModel& model, long N1, int threads) {
    if (!std::isfinite(pi.residual_mean())) throw InfiniteMeanError("kappa_b: scaling law has infinite mean");
    auto tab = build_coefficients(pi, xi, N1, true, threads);
    return kappa_b(tab, pi.s1(), pi.stored_mean(), model, threads);
}

namespace {

double mix(const std::vector<double>& kappa, std::size_t count, double lambda) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
        double y = kappa[n] * pois_pmf(static_cast<std::int64_t>(n), lambda) - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

double psi_mix(const KappaSeries& series, double u, double s1, int xi) {
    require(u >= 0.0, "psi_mix: u must be nonnegative");
    require(s1 > 0.0 && xi >= 1, "psi_mix: need s1 > 0 and xi >= 1");
    if (u == 0.0) return series.coeffs.front();
    return mix(series.coeffs, series.coeffs.size(), xi * u / s1);
}

double psi_mix(const KappaSeries& series, double u) { return psi_mix(series, u, series.s1, series.xi); }

double psi_mix_truncated(const KappaSeries& series, double u, long N1) {
    require(u >= 0.0, "psi_mix_truncated: u must be nonnegative");
    require(N1 >= 0 && N1 <= series.N1(), "psi_mix_truncated: N1 exceeds the series length");
    if (u == 0.0) return series.coeffs.front();
    return mix(series.coeffs, static_cast<std::size_t>(N1) + 1, series.mix_rate(u));
}

long choose_N1(double lambda, double tol) {
    require(lambda > 0.0, "choose_N1: lambda must be positive");
    require(tol > 0.0 && tol < 1.0, "choose_N1: tol must lie in (0, 1)");
    long lo = static_cast<long>(std::ceil(lambda));
    if (chernoff_tail(lambda, lo) <= tol) return lo;
    long step = 1;
    long hi = lo + step;
    while (chernoff_tail(lambda, hi) > tol) {
        lo = hi;
        step *= 2;
        hi = lo + step;
    }
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        if (chernoff_tail(lambda, mid) <= tol) hi = mid;
        else lo = mid;
    }
    return hi;
}

}  // namespace esm
