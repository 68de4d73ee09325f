#include <cmath>
#include <limits>
#include <memory>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "doctest.h"
#include "esmruin/discretize.hpp"
#include "esmruin/dist_core.hpp"
#include "esmruin/error_bounds.hpp"
#include "esmruin/errors.hpp"
#include "esmruin/ruin_kernel.hpp"

using namespace esm;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mp_poisson_upper_tail(double lambda, long N1) {
    mp L = lambda, term = exp(-L), below = 0;
    for (long n = 0; n <= N1; ++n) {
        below += term;
        term *= L / (n + 1);
    }
    return static_cast<double>(mp(1) - below);
}

std::shared_ptr<const Distribution> pareto_moment(double phi) {
    return std::make_shared<MomentDistribution>(std::make_shared<ParetoClaim>(phi));
}

}  // namespace

TEST_CASE("vatamidou bound examples") {
    CHECK(vatamidou_bound(0.0, 0.95, 0.3, 0.4) == 0.0);
    CHECK(vatamidou_bound(0.02, 0.5, 0.0, 0.0) == doctest::Approx(0.02 * 0.5 * 0.5).epsilon(1e-15));
    CHECK(vatamidou_bound(0.01, 0.95, 0.5, 0.5) == doctest::Approx(1.7234e-3).epsilon(1e-4));
    CHECK_THROWS_AS(vatamidou_bound(0.01, 1.0, 0.5, 0.5), DomainError);
}

TEST_CASE("vatamidou bound never exceeds the unrefined one") {
    for (double rho : {0.1, 0.5, 0.95, 0.999})
        for (double f1 : {0.0, 0.3, 0.9, 1.0})
            for (double f2 : {0.0, 0.5, 0.99}) {
                double plain = 0.01 * rho / (1.0 - rho);
                CHECK(vatamidou_bound(0.01, rho, f1, f2) <= plain * (1 + 1e-14));
            }
}

TEST_CASE("erlangization bound for the scale mixture of F_hat") {
    ParetoIntegratedTail fhat(2.0);
    CHECK(erlangization_bound_a_direct(fhat, 100, 0.95, 0.0) == 0.0);
    CHECK(erlangization_bound_a(fhat, 100, 0.95, 0.0) == 0.0);
    CHECK(erlangization_bound_a_direct(fhat, 100, 0.95, 1e-8) < 1e-6);

    double b1 = erlangization_bound_a_direct(fhat, 100, 0.95, 1.0);
    CHECK(b1 > 2.5736e-4 / 3.0);
    CHECK(b1 < 2.5736e-4 * 3.0);
    for (double u : {1.0, 10.0, 100.0}) {
        double e100 = erlangization_bound_a_direct(fhat, 100, 0.95, u);
        double e500 = erlangization_bound_a_direct(fhat, 500, 0.95, u);
        double e1000 = erlangization_bound_a_direct(fhat, 1000, 0.95, u);
        INFO("u=" << u << " " << e100 << " " << e500 << " " << e1000);
        CHECK(e500 < e100);
        CHECK(e1000 < e500);
        CHECK(e100 / e1000 >= 8.0);
        CHECK(e100 / e1000 <= 12.0);
    }
    double r100 = erlangization_bound_a(fhat, 100, 0.95, 1.0), r1000 = erlangization_bound_a(fhat, 1000, 0.95, 1.0);
    CHECK(r100 > 0.0);
    CHECK(r1000 < r100);
    CHECK_THROWS_AS(erlangization_bound_a(fhat, 100, 0.95, 1.0, IntervalScheme{1.5, 0.5, 10}), DomainError);
}

TEST_CASE("interval scheme endpoints") {
    IntervalScheme s{0.5, 0.5, 3};
    CHECK(s.a(0) == 0.0);
    CHECK(std::isinf(s.b(0)));
    CHECK(s.a(1) == 0.75);
    CHECK(s.b(2) == 1.125);
    CHECK(s.a(4) == 1.0);
    CHECK(s.b(4) == 1.0);
}

TEST_CASE("discretization bound vanishes when the step law is exact") {
    DiscreteLaw f({0.5, 2.0}, {0.4, 0.6});
    DiscreteScaling pi({0.5, 2.0}, {0.4, 0.6}, 0.0, 0.0);
    for (double u : {0.1, 1.0, 5.0}) CHECK(discretization_bound_a(f, pi, 10, 0.9, u) == doctest::Approx(0.0));
    ParetoIntegratedTail fhat(2.0);
    auto coarse = build_scaling(fhat, GeometricGrid(-3.0, 30, 100), Mode::Below);
    CHECK(discretization_bound_a(fhat, coarse, 100, 0.95, 0.0) == 0.0);
    CHECK(discretization_bound_a_formula(0.0, 0.9, 0.2, 0.3, 0.1) == 0.0);
    CHECK(discretization_bound_a_formula(0.01, 0.95, 0.5, 0.5, 0.0) ==
          doctest::Approx(vatamidou_bound(0.01, 0.95, 0.5, 0.5)));
    // the inflated arguments saturate at 1
    CHECK(discretization_bound_a_formula(0.01, 0.5, 0.8, 0.8, 0.5) == doctest::Approx(0.01 * 0.25 / 0.25));
}

TEST_CASE("discretization bound covers the gap between two discretizations") {
    ParetoIntegratedTail fhat(2.0);
    RiskModel model(0.9);
    const int xi = 10;
    const double u = 1.0;
    auto run = [&](int K, double t0) {
        int n2 = select_n2(fhat, t0, K, Mode::Below, 1e-12);
        auto pi = build_scaling(fhat, GeometricGrid(t0, K, n2), Mode::Below);
        long N1 = choose_N1(xi * u / pi.s1(), 1e-16);
        auto ks = kappa_a(pi, xi, model, N1, 1);
        double psi = psi_mix(ks, u);
        double bound = discretization_bound_a(fhat, pi, xi, model.rho, u) +
                       truncation_bound_a(pi.residual_mass(), model.rho, xi, u, pi.s1(), N1);
        return std::pair{psi, bound};
    };
    auto [psi_c, b_c] = run(10, -2.0);
    auto [psi_f, b_f] = run(60, -4.0);
    INFO(psi_c << " " << psi_f << " " << b_c << " " << b_f);
    CHECK(std::fabs(psi_c - psi_f) <= b_c + b_f);
    CHECK(b_f < b_c);
}

TEST_CASE("simple erlangization bound for the moment route") {
    double e = std::exp(-1.0);
    CHECK(erlangization_bound_b_simple(1, 0.5) == doctest::Approx(e / (1.0 - 0.5 * (1.0 - e))).epsilon(1e-14));
    CHECK(erlangization_bound_b_simple(1, 0.5) == doctest::Approx(0.5379).epsilon(1e-4));
    CHECK(erlangization_bound_b_simple(100, 1e-9) < 1e-9);
    for (int xi : {1, 10, 100, 1000})
        for (double rho : {0.3, 0.95}) {
            double cap = rho / (1.0 - rho) * std::sqrt(2.0 / (M_PI * xi));
            CHECK(erlangization_bound_b_simple(xi, rho) <= cap);
        }
}

TEST_CASE("first-order balance for the refined bound") {
    for (int xi : {5, 100})
        for (double d2 : {1.1, 2.0}) {
            double d1 = refined_delta1(xi, d2);
            CHECK(d1 > 0.0);
            CHECK(d1 < 1.0);
            CHECK(epsilon_m_delta(xi, d1) ==
                  doctest::Approx(erlang_integrated_tail_complement(d2, xi)).epsilon(1e-10));
        }
    CHECK_THROWS_AS(refined_delta1(10, 0.9), DomainError);
}

TEST_CASE("refined erlangization bound") {
    const int xi = 100;
    const double rho = 0.95;
    double simple = erlangization_bound_b_simple(xi, rho);
    double d1 = refined_delta1(xi, 2.0);
    // with no increment mass the refinement only subtracts
    CHECK(erlangization_bound_b_refined_formula(0.0, 0.5, rho, xi, d1, 2.0) <= simple);
    auto hf = pareto_moment(2.0);
    double r10 = erlangization_bound_b_refined(*hf, xi, rho, 10.0, 2.0);
    INFO("refined=" << r10 << " simple=" << simple);
    CHECK(r10 < simple);
    auto best = erlangization_bound_b_refined_search(*hf, xi, rho, 10.0);
    CHECK(best.value <= r10);
}

TEST_CASE("discretization bound for the moment route") {
    double v = discretization_bound_b_formula(0.01, 0.95, 0.5, 0.5, 0.9);
    double d = 1.0 - 0.95 * 0.95;
    CHECK(v == doctest::Approx(0.01 * 0.05 * 0.95 / (d * d)).epsilon(1e-14));
    CHECK(discretization_bound_b_formula(0.0, 0.95, 0.5, 0.5, 0.9) == 0.0);

    DiscreteLaw h({0.5, 2.0}, {0.4, 0.6});
    DiscreteScaling hpi({0.5, 2.0}, {0.4, 0.6}, 0.0, 0.0);
    CHECK(discretization_bound_b(h, hpi, 10, 0.9, 1.0) == doctest::Approx(0.0));

    auto claim = std::make_shared<ParetoClaim>(3.0);
    MomentDistribution hf(claim);
    double prev = kInf;
    const std::pair<int, double> levels[] = {{30, -3.0}, {60, -4.5}, {120, -6.0}};
    for (auto [K, t0] : levels) {
        int n2 = select_n2(*claim, t0, K, Mode::Below, 1e-10);
        auto hpi_k = moment_scaling(build_scaling(*claim, GeometricGrid(t0, K, n2), Mode::Below));
        double b = discretization_bound_b(hf, hpi_k, 100, 0.9, 5.0);
        INFO("K=" << K << " bound=" << b);
        CHECK(b > 0.0);
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("moment law distance bound dominates a dense scan") {
    Exponential f(1.0);
    int n2 = select_n2(f, -3.0, 8, Mode::Below, 1e-10);
    auto pi = build_scaling(f, GeometricGrid(-3.0, 8, n2), Mode::Below);
    auto hpi = moment_scaling(pi);
    for (double u : {0.2, 1.0, 3.0}) {
        double tail = 0.0, body = 0.0;
        for (int i = 0; i <= 20000; ++i) {
            double x = 40.0 * i / 20000.0;
            double d = std::fabs(moment_cdf(f, x) - hpi.cdf(x));
            (x >= u ? tail : body) = std::max(x >= u ? tail : body, d);
        }
        INFO("u=" << u);
        CHECK(hf_hpi_bound(f, pi, u, Region::Tail) >= tail);
        CHECK(hf_hpi_bound(f, pi, u, Region::Body) >= body);
    }
    ParetoClaim heavy(2.0);
    auto heavy_pi = build_scaling(heavy, GeometricGrid(-3.0, 8, 50), Mode::Below);
    CHECK_THROWS_AS(hf_hpi_bound(ParetoIntegratedTail(2.0), heavy_pi, 1.0, Region::Tail), InfiniteMeanError);
}

TEST_CASE("truncation bound for the scale mixture of F_hat") {
    const double eps1 = 9.5701e-14, s1 = std::exp(-3.0);
    auto at = [&](double u) { return truncation_bound_a(eps1, 0.95, 100, u, s1, static_cast<long>(2e7)); };
    CHECK(at(1.0) == doctest::Approx(3.6522e-9).epsilon(1e-3));
    CHECK(at(1000.0) == doctest::Approx(3.6522e-6).epsilon(1e-3));
    double ratio = at(10.0) / at(1.0);
    CHECK(ratio >= 9.99);
    CHECK(ratio <= 10.01);
    CHECK(truncation_bound_a(0.0, 0.95, 100, 1.0, s1, 100000) < 1e-300);
    CHECK(truncation_bound_a(eps1, 0.95, 100, 0.0, s1, 0) == doctest::Approx(2.0 * eps1 / (0.05 * 0.05)));
}

TEST_CASE("truncation bound for the moment route") {
    const double s1 = std::exp(-3.0);
    CHECK(truncation_bound_b(0.0, 0.95, 100, 1.0, s1, 1.2, 100000) < 1e-300);
    CHECK_THROWS_AS(truncation_bound_b(kInf, 0.95, 100, 1.0, s1, 1.2, 100000), InfiniteMeanError);
    // the exponential factor makes this bound very loose away from u = 0
    CHECK(truncation_bound_b(1e-10, 0.95, 100, 1.0, s1, 1.2, 100000) > 1.0);
    CHECK(truncation_bound_b(1e-10, 0.95, 100, 0.0, s1, 1.2, 0) < 1e-10);
}

TEST_CASE("poisson tail bounds") {
    CHECK(chernoff_tail(1.0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(chernoff_tail(10.0, 40) == doctest::Approx(2.2e-12).epsilon(0.05));
    for (double lambda : {1.0, 10.0, 300.0})
        for (long N1 : {static_cast<long>(lambda), static_cast<long>(1.5 * lambda) + 5, static_cast<long>(3 * lambda) + 20}) {
            double exact = mp_poisson_upper_tail(lambda, N1);
            INFO("lambda=" << lambda << " N1=" << N1);
            CHECK(chernoff_tail(lambda, N1) >= exact * (1 - 1e-12));
            CHECK(poisson_tail_bound(lambda, N1) >= exact * (1 - 1e-12));
            CHECK(poisson_tail_bound(lambda, N1) <= chernoff_tail(lambda, N1));
        }
    double prev = 2.0;
    for (long N1 = 10; N1 < 80; ++N1) {
        double c = chernoff_tail(10.0, N1);
        CHECK(c < prev);
        prev = c;
    }
    CHECK(poisson_tail_bound(0.0, 0) == 0.0);
    CHECK(poisson_tail_bound(50.0, 0) <= 1.0);
}

TEST_CASE("all bounds are nonnegative") {
    ParetoIntegratedTail fhat(2.0);
    auto pi = build_scaling(fhat, GeometricGrid(-3.0, 30, 200), Mode::Below);
    auto hf = pareto_moment(2.0);
    for (double u : {0.0, 0.5, 3.0})
        for (int xi : {1, 20}) {
            CHECK(erlangization_bound_a(fhat, xi, 0.9, u) >= 0.0);
            CHECK(erlangization_bound_a_direct(fhat, xi, 0.9, u) >= 0.0);
            CHECK(discretization_bound_a(fhat, pi, xi, 0.9, u) >= 0.0);
            CHECK(erlangization_bound_b_simple(xi, 0.9) >= 0.0);
            CHECK(truncation_bound_a(1e-6, 0.9, xi, u, pi.s1(), 50) >= 0.0);
        }
}

TEST_CASE("budget totals and export") {
    ErrorBudget b;
    b.erlangization = 1e-4;
    b.discretization = 2e-4;
    b.truncation = 3e-9;
    b.finalize();
    CHECK(b.total == doctest::Approx(3.00003e-4));
    CHECK(b.to_csv().find("erlangization") != std::string::npos);
}
