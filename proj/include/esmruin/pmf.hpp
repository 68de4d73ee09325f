#pragma once

#include <cstdint>

// Saddle-point (Loader) evaluation of binomial and Poisson probabilities.
namespace esm {

double stirlerr(double n);
double bd0(double x, double np);

double binom_pmf(std::int64_t k, std::int64_t n, double p);
double binom_cdf(std::int64_t k, std::int64_t n, double p);
double binom_sf(std::int64_t k, std::int64_t n, double p);  // P(X > k)

double pois_pmf(std::int64_t k, double lambda);

// E[(c - N)^+] and E[(N - c)^+] for N ~ Poisson(lambda), integer c >= 0.
double pois_shortfall(std::int64_t c, double lambda);
double pois_excess(std::int64_t c, double lambda);

}  // namespace esm
