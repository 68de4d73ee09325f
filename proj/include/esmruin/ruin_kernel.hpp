#pragma once

#include <vector>

#include "esmruin/discretize.hpp"
#include "esmruin/pmf.hpp"

namespace esm {

struct RiskModel {
    double rho = 0.95;    // gamma * mu_F
    double mu_F = 1.0;
    double gamma = 0.95;  // Poisson claim intensity

    RiskModel() = default;
    RiskModel(double rho_, double mu_F_ = 1.0);
};

enum class Variant { A, B };

struct KappaSeries {
    std::vector<double> coeffs;  // kappa_0 .. kappa_N1
    Variant variant = Variant::A;
    int xi = 1;
    double s1 = 1.0;
    double intensity = 0.0;  // rho for A, rho / mu_Pi for B

    long N1() const { return static_cast<long>(coeffs.size()) - 1; }
    double mix_rate(double u) const { return xi * u / s1; }
};

// Per-atom coefficient sums evaluated for indices 0..N1.
struct CoefficientTable {
    std::vector<double> B, C, D;
    int xi = 1;
    long N1 = 0;
    double discarded_mass = 0.0;  // probability mass dropped by per-atom window cuts
};

double coeff_B(long i, const DiscreteScaling& pi, int xi);
double coeff_B_truncated(long i, const DiscreteScaling& pi, int xi);
double coeff_C(long n, const DiscreteScaling& pi, int xi);
double coeff_D(long n, const DiscreteScaling& pi, int xi);

// Single-atom forms: p bin(xi-1; i, p) and (xi/(i+1)) bin(xi; i+1, p).
double coeff_B_atom(long i, double p, int xi);
double coeff_B_atom_truncated(long i, double p, int xi);

CoefficientTable build_coefficients(const DiscreteScaling& pi, int xi, long N1, bool with_D, int threads = 0);

KappaSeries kappa_a(const DiscreteScaling& pi, int xi, const RiskModel& model, long N1, int threads = 0);
KappaSeries kappa_a(const CoefficientTable& table, double s1, const RiskModel& model, int threads = 0);
KappaSeries kappa_b(const DiscreteScaling& pi, int xi, const RiskModel& model, long N1, int threads = 0);
KappaSeries kappa_b(const CoefficientTable& table, double s1, double mu_pi, const RiskModel& model,
                    int threads = 0);

double psi_mix(const KappaSeries& series, double u, double s1, int xi);
double psi_mix(const KappaSeries& series, double u);
// mixture over kappa_0..kappa_N1 only (N1 <= series.N1())
double psi_mix_truncated(const KappaSeries& series, double u, long N1);

long choose_N1(double lambda, double tol);

// sum_t a[t] * b[t], blocked accumulators with compensated block totals
double dot_compensated(const double* a, const double* b, std::size_t n);

}  // namespace esm
