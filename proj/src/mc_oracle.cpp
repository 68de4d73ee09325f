#include "esmruin/mc_oracle.hpp"

#include <cmath>
#include <string>

#include "esmruin/errors.hpp"
#include "esmruin/parallel.hpp"

namespace esm {

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

namespace {

// Uniform (0, 1) stream for one sample index.
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint64_t index)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          index_(index) {}

    double next() {
        if (pos_ == 2) refill();
        std::uint64_t bits = (static_cast<std::uint64_t>(buf_[2 * pos_]) << 32 | buf_[2 * pos_ + 1]) >> 11;
        ++pos_;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

private:
    void refill() {
        Philox4x32::Counter ctr{static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
                                block_++, 0x5eed0001u};
        buf_ = Philox4x32::block(ctr, key_);
        pos_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t index_;
    std::uint32_t block_ = 0;
    Philox4x32::Counter buf_{};
    int pos_ = 2;
};

}  // namespace

OracleEstimate simulate_psi(double u, double rho, const std::function<double(double)>& fhat_quantile,
                            const OracleConfig& cfg, int threads) {
    require(rho > 0.0 && rho < 1.0, "simulate_psi: rho must lie in (0, 1)");
    require(u >= 0.0, "simulate_psi: u must be nonnegative");
    require(cfg.samples >= 1, "simulate_psi: samples must be at least 1");
    require(cfg.streams >= 1, "simulate_psi: streams must be at least 1");
    require(static_cast<bool>(fhat_quantile), "simulate_psi: missing quantile function");
    double log_rho = std::log(rho);
    auto streams = static_cast<std::uint64_t>(cfg.streams);
    std::vector<std::uint64_t> hits(streams, 0);
    parallel_for(streams, threads, [&](std::size_t s) {
        std::uint64_t begin = cfg.samples * s / streams, end = cfg.samples * (s + 1) / streams;
        std::uint64_t h = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            SampleStream rng(cfg.seed, i);
            auto n = static_cast<std::uint64_t>(std::floor(std::log(rng.next()) / log_rho));
            double total = 0.0;
            for (std::uint64_t k = 0; k < n; ++k) {
                total += fhat_quantile(rng.next());
                if (total > u) {
                    ++h;
                    break;
                }
            }
        }
        hits[s] = h;
    });
    OracleEstimate r;
    r.samples = cfg.samples;
    for (auto h : hits) r.hits += h;
    double n = static_cast<double>(cfg.samples);
    r.estimate = static_cast<double>(r.hits) / n;
    r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / n);
    return r;
}

const std::vector<std::pair<double, double>>& ramsay_fixture() {
    static const std::vector<std::pair<double, double>> rows = {
        {1, 0.915525781},  {5, 0.837251342},  {10, 0.770605760},  {30, 0.599042454},
        {50, 0.489654166}, {100, 0.325305086}, {500, 0.059131409}, {1000, 0.024544601},
    };
    return rows;
}

double ramsay_reference(double u) {
    for (const auto& [x, v] : ramsay_fixture())
        if (x == u) return v;
    throw UnknownFixtureError("ramsay_reference: no fixture for u = " + std::to_string(u));
}

}  // namespace esm
