#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "esmruin/discretize.hpp"
#include "esmruin/dist_core.hpp"

namespace esm {

// A_0 = [0, inf], A_k = [1 - c q^k, 1 + c q^k] for k = 1..K, A_k = {1} beyond K.
struct IntervalScheme {
    double c = 0.5;
    double q = 0.5;
    int K = 40;

    void validate() const;
    double a(int k) const;
    double b(int k) const;
};

struct DeltaBound {
    double value = 0.0;
    double delta = 0.0;
};

struct ErrorBudget {
    double erlangization = 0.0;
    double discretization = 0.0;
    double truncation = 0.0;
    double total = 0.0;
    nlohmann::json parameters = nlohmann::json::object();

    void finalize() { total = erlangization + discretization + truncation; }
    std::string to_csv() const;
};

double vatamidou_bound(double sup_diff, double rho, double f1_u, double f2_u);

// sum over the interval scheme of sup_l (F(l/a_k) - F(l/b_k)) times the G-mass between rings
double erlangization_bound_a(const Distribution& fhat, int xi, double rho, double u,
                             const IntervalScheme& scheme = {});
// direct route: numeric sup_l |F(l) - (F*G)(l)| with exact F(u), (F*G)(u)
double erlangization_bound_a_direct(const Distribution& fhat, int xi, double rho, double u);

double discretization_bound_a_formula(double eta, double rho, double fhat_u_delta, double pi_u_delta,
                                      double g_delta);
DeltaBound discretization_bound_a_search(const Distribution& fhat, const DiscreteScaling& pi, int xi, double rho,
                                         double u);
double discretization_bound_a(const Distribution& fhat, const DiscreteScaling& pi, int xi, double rho, double u);

double erlangization_bound_b_simple(int xi, double rho);
// delta1 solving the first-order (n = 1) balance eps_m(delta1) = int_{delta2}^inf (1 - G)
double refined_delta1(int xi, double delta2);
// (1-rho) rho Delta T1 + simple bound - (1-rho) T2, with H = H_F(u/delta1)
double erlangization_bound_b_refined_formula(double Delta, double H, double rho, int xi, double delta1,
                                             double delta2);
double erlangization_bound_b_refined(const Distribution& hf, int xi, double rho, double u, double delta2);
DeltaBound erlangization_bound_b_refined_search(const Distribution& hf, int xi, double rho, double u,
                                                const std::vector<double>& delta2_grid = {1.1, 1.5, 2.0, 4.0});

double discretization_bound_b_formula(double eta, double rho, double hf_u_delta, double hpi_u_delta,
                                      double ghat_delta);
// hpi is the size-biased scaling law (see moment_scaling)
DeltaBound discretization_bound_b_search(const Distribution& hf, const DiscreteScaling& hpi, int xi, double rho,
                                         double u);
double discretization_bound_b(const Distribution& hf, const DiscreteScaling& hpi, int xi, double rho, double u);

enum class Region { Tail, Body };
double hf_hpi_bound(const Distribution& f, const DiscreteScaling& pi, double u, Region region);

double chernoff_tail(double lambda, long N1);
// min(1, Chernoff, exact Poisson upper tail P(N > N1))
double poisson_tail_bound(double lambda, long N1);
double truncation_bound_a(double eps1, double rho, int xi, double u, double s1, long N1);
double truncation_bound_b(double eps2, double rho, int xi, double u, double s1, double mu_pi, long N1);

}  // namespace esm
