#pragma once

#include <string>
#include <vector>

#include "esmruin/dist_core.hpp"

namespace esm {

enum class Mode { Above, Below, Middle, ArithMiddle };

Mode parse_mode(const std::string& name);
std::string mode_name(Mode mode);

struct GeometricGrid {
    double t0 = -3.0;
    int K = 270;
    int N2 = 1;

    GeometricGrid() = default;
    GeometricGrid(double t0_, int K_, int N2_);
    // s_j = e^{t0 + (j-1)/K}, j >= 1
    double s(long j) const;
    // cell boundary w_j for the given mode, w_0 = 0
    double w(long j, Mode mode) const;
};

// Truncated scaling law: stored atoms plus explicit residual mass and mean.
class DiscreteScaling {
public:
    DiscreteScaling(std::vector<double> support, std::vector<double> probs, double residual_mass,
                    double residual_mean);

    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }
    // C_j = pi_1 + ... + pi_j
    const std::vector<double>& cumulative() const { return cumulative_; }
    std::size_t size() const { return support_.size(); }
    double s1() const { return support_.front(); }

    double residual_mass() const { return eps1_; }  // epsilon_1
    double residual_mean() const { return eps2_; }  // epsilon_2, may be +inf
    double stored_mass() const { return cumulative_.back(); }
    double stored_mean() const { return stored_mean_; }
    double mean() const { return stored_mean_ + eps2_; }

    double cdf(double s) const;
    std::string to_csv() const;

private:
    std::vector<double> support_, probs_, cumulative_;
    double eps1_, eps2_, stored_mean_;
};

DiscreteScaling build_scaling(const Distribution& target, const GeometricGrid& grid, Mode mode);

// Smallest N2 with target.sf(w_N2) < eps1_target.
int select_n2(const Distribution& target, double t0, int K, Mode mode, double eps1_target);

// Size-biased law H_Pi with probabilities pi_j s_j / mu_Pi.
DiscreteScaling moment_scaling(const DiscreteScaling& pi);

// sup_{s in [lo, hi]} |target(s) - Pi(s)| over the exact candidate set of a step function.
double sup_diff_step(const Distribution& target, const DiscreteScaling& pi, double lo, double hi);

}  // namespace esm
