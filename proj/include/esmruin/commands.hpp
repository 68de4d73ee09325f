#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esmruin/discretize.hpp"

namespace esm {

struct RunConfig {
    char model = 'a';
    double phi = 2.0;
    double rho = 0.95;
    int xi = 100;
    double t0 = -3.0;
    int grid_k = 270;
    double eps1_target = 9.5701e-14;
    std::vector<double> u_list{1.0};
    double n1_tol = 1e-16;
    int threads = 0;
    bool long_running = false;
    Mode mode = Mode::Below;
    bool timing = true;  // false writes wall_seconds as 0 so output bytes are reproducible

    void validate() const;
};

// u above this needs long_running for anything that runs the kappa recursion
inline constexpr double kLongRunningU = 100.0;

struct RuinRow {
    double u = 0.0;
    double psi = 0.0;
    double erlangization = 0.0;
    double discretization = 0.0;
    double truncation = 0.0;
    double total = 0.0;
    long n1 = 0;
    int n2 = 0;
    double wall_seconds = 0.0;
};

std::vector<RuinRow> compute_ruin(const RunConfig& cfg);

std::string cmd_ruin(const RunConfig& cfg);
std::string cmd_bounds(const RunConfig& cfg);
std::string cmd_oracle(const RunConfig& cfg, std::uint64_t samples, std::uint64_t seed, int streams = 64);
std::string cmd_curve(const RunConfig& cfg, int points, double x_min = 0.0, double x_max = 10.0);
std::string cmd_reproduce(int table, const RunConfig& cfg);

}  // namespace esm
