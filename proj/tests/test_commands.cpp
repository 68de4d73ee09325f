#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "esmruin/commands.hpp"
#include "esmruin/errors.hpp"

using namespace esm;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char ch = line[i];
            if (ch == '"') {
                if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = !quoted;
                }
            } else if (ch == ',' && !quoted) {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell += ch;
            }
        }
        cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

RunConfig quick() {
    RunConfig c;
    c.xi = 4;
    c.grid_k = 30;
    c.t0 = -1.0;
    c.eps1_target = 1e-8;
    c.timing = false;
    return c;
}

}  // namespace

TEST_CASE("ruin at the benchmark settings") {
    RunConfig cfg;
    cfg.u_list = {0.0, 1.0};
    cfg.timing = false;
    auto rows = compute_ruin(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].psi == 0.95);
    CHECK(rows[0].total == 0.0);
    CHECK(rows[0].n1 == 0);
    CHECK(std::fabs(rows[1].psi - 0.915506746) < 1e-9);
    CHECK(rows[1].n2 == 8905);
    CHECK(rows[1].n1 > 2000);
    CHECK(rows[1].truncation == doctest::Approx(3.6522e-9).epsilon(1e-3));
    CHECK(rows[1].total == doctest::Approx(rows[1].erlangization + rows[1].discretization + rows[1].truncation));

    auto csv = parse_csv(cmd_ruin(cfg));
    REQUIRE(csv.size() == 3);
    CHECK(csv[0] == std::vector<std::string>{"u", "psi", "erlangization_bound", "discretization_bound",
                                             "truncation_bound", "total_bound", "n1", "n2", "wall_seconds"});
    CHECK(csv[1][1] == "0.95");
    CHECK(csv[2][8] == "0");
}

TEST_CASE("moment route at the benchmark settings") {
    RunConfig cfg;
    cfg.model = 'b';
    cfg.u_list = {5.0};
    cfg.timing = false;
    auto rows = compute_ruin(cfg);
    CHECK(std::fabs(rows[0].psi - 0.837576604) < 1e-6);
    CHECK(std::isinf(rows[0].total));
    auto csv = parse_csv(cmd_ruin(cfg));
    CHECK(csv[1][5] == "unbounded");
}

TEST_CASE("configuration validation") {
    auto bad = [](auto edit) {
        RunConfig c;
        edit(c);
        CHECK_THROWS_AS(c.validate(), DomainError);
    };
    bad([](RunConfig& c) { c.rho = 1.0; });
    bad([](RunConfig& c) { c.rho = 0.0; });
    bad([](RunConfig& c) { c.phi = 1.0; });
    bad([](RunConfig& c) { c.xi = 0; });
    bad([](RunConfig& c) { c.grid_k = 0; });
    bad([](RunConfig& c) { c.model = 'c'; });
    bad([](RunConfig& c) { c.u_list = {}; });
    bad([](RunConfig& c) { c.u_list = {-1.0}; });
    bad([](RunConfig& c) { c.u_list = {std::nan("")}; });
    bad([](RunConfig& c) { c.threads = -1; });
    RunConfig far;
    far.u_list = {500.0};
    CHECK_THROWS_AS(compute_ruin(far), DomainError);
    CHECK_THROWS_AS(cmd_reproduce(4, RunConfig{}), DomainError);
    CHECK_THROWS_AS(cmd_curve(RunConfig{}, 1), DomainError);
    CHECK_THROWS_AS(cmd_oracle(RunConfig{}, 0, 1), DomainError);
}

TEST_CASE("bounds output has four rows per capital") {
    RunConfig cfg = quick();
    cfg.u_list = {0.5, 2.0};
    auto csv = parse_csv(cmd_bounds(cfg));
    REQUIRE(csv.size() == 9);
    CHECK(csv[0] == std::vector<std::string>{"source", "value", "parameters"});
    CHECK(csv[1][0] == "erlangization");
    CHECK(csv[4][0] == "total");
    CHECK(csv[8][2].find("\"u\":2.0") != std::string::npos);
    double sum = std::stod(csv[5][1]) + std::stod(csv[6][1]) + std::stod(csv[7][1]);
    CHECK(std::stod(csv[8][1]) == doctest::Approx(sum).epsilon(1e-10));
}

TEST_CASE("reproduced table shapes") {
    RunConfig cfg = quick();
    auto t1 = parse_csv(cmd_reproduce(1, cfg));
    REQUIRE(t1.size() == 9);
    CHECK(t1[0] == std::vector<std::string>{"u", "xi_100", "xi_500", "xi_1000", "caveat"});
    for (std::size_t i = 1; i < t1.size(); ++i) CHECK(std::stod(t1[i][3]) < std::stod(t1[i][1]));

    auto t2 = parse_csv(cmd_reproduce(2, cfg));
    REQUIRE(t2.size() == 9);
    CHECK(t2[0] == std::vector<std::string>{"u", "discretization", "truncation"});

    auto t3 = parse_csv(cmd_reproduce(3, cfg));
    REQUIRE(t3.size() == 9);
    CHECK(t3[0] == std::vector<std::string>{"u", "approx_a", "approx_b", "ramsay"});
    CHECK(t3[6][1] != "NA");
    CHECK(t3[7][1] == "NA");
    CHECK(t3[8][2] == "NA");
    CHECK(t3[8][3] == "0.024544601");
}

TEST_CASE("curve sampling") {
    RunConfig cfg = quick();
    auto two = parse_csv(cmd_curve(cfg, 2, 0.5, 8.0));
    REQUIRE(two.size() == 3);
    CHECK(two[0] == std::vector<std::string>{"x", "fhat", "pi_step", "esm_cdf"});
    CHECK(two[1][0] == "0.5");
    CHECK(two[2][0] == "8");
    auto from_zero = parse_csv(cmd_curve(cfg, 50, 0.0, 10.0));
    REQUIRE(from_zero.size() == 51);
    CHECK(from_zero[1][0] == "0");
    CHECK(from_zero[1][3] == "0");
    CHECK(from_zero[50][0] == "10");
    cfg.model = 'b';
    auto b = parse_csv(cmd_curve(cfg, 20, 0.0, 10.0));
    for (std::size_t i = 2; i < b.size(); ++i) CHECK(std::stod(b[i][3]) >= std::stod(b[i - 1][3]));
}

TEST_CASE("scale mixture curve approaches F_hat as xi and K grow") {
    double prev = 1.0;
    const std::pair<int, double> levels[] = {{30, -3.0}, {60, -4.0}, {120, -5.0}};
    for (auto [n, t0] : levels) {
        RunConfig cfg;
        cfg.xi = n;
        cfg.grid_k = n;
        cfg.t0 = t0;
        cfg.eps1_target = 1e-8;
        auto rows = parse_csv(cmd_curve(cfg, 60, 0.01, 100.0));
        double sup = 0.0;
        for (std::size_t i = 1; i < rows.size(); ++i)
            sup = std::max(sup, std::fabs(std::stod(rows[i][3]) - std::stod(rows[i][1])));
        INFO("xi=K=" << n << " sup=" << sup);
        CHECK(sup < prev);
        prev = sup;
    }
}

TEST_CASE("oracle output") {
    RunConfig cfg;
    cfg.u_list = {0.0, 1.0, 2.0};
    auto a = cmd_oracle(cfg, 20000, 9, 8);
    CHECK(a == cmd_oracle(cfg, 20000, 9, 3));
    auto csv = parse_csv(a);
    REQUIRE(csv.size() == 4);
    CHECK(csv[0] == std::vector<std::string>{"u", "estimate", "stderr", "ramsay_if_known"});
    CHECK(csv[2][3] == "0.915525781");
    CHECK(csv[3][3] == "");
    cfg.rho = 0.9;
    CHECK(parse_csv(cmd_oracle(cfg, 1000, 9, 8))[2][3] == "");
}

TEST_CASE("output is identical across thread counts") {
    RunConfig cfg = quick();
    cfg.u_list = {0.0, 0.3, 3.0, 30.0};
    for (char m : {'a', 'b'}) {
        cfg.model = m;
        cfg.threads = 1;
        auto one = cmd_ruin(cfg);
        auto bounds_one = cmd_bounds(cfg);
        cfg.threads = 8;
        CHECK(one == cmd_ruin(cfg));
        CHECK(bounds_one == cmd_bounds(cfg));
    }
}
