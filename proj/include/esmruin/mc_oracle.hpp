#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace esm {

// Philox4x32-10 counter-based generator.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key);
};

struct OracleConfig {
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 20240601;
    int streams = 64;
};

struct OracleEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t samples = 0;
};

// P(Y_1 + ... + Y_N > u), N ~ Geometric with P(N = n) = (1-rho) rho^n, Y_i = quantile(U_i).
// Each sample draws from its own counter range, so results do not depend on streams or threads.
OracleEstimate simulate_psi(double u, double rho, const std::function<double(double)>& fhat_quantile,
                            const OracleConfig& cfg, int threads = 0);

double ramsay_reference(double u);
const std::vector<std::pair<double, double>>& ramsay_fixture();

}  // namespace esm
