#include "esmruin/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

#include "esmruin/csv.hpp"
#include "esmruin/dist_core.hpp"
#include "esmruin/error_bounds.hpp"
#include "esmruin/errors.hpp"
#include "esmruin/mc_oracle.hpp"
#include "esmruin/parallel.hpp"
#include "esmruin/ruin_kernel.hpp"

namespace esm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Everything a run shares across u: the scaling law and the laws the bounds compare it with.
struct Setup {
    std::shared_ptr<const Distribution> claim;
    std::shared_ptr<const Distribution> fhat;
    std::shared_ptr<const Distribution> target;  // fhat for model a, claim for model b
    std::shared_ptr<const Distribution> hf;      // size-biased claim law, model b only
    std::optional<DiscreteScaling> pi;
    std::optional<DiscreteScaling> hpi;
    int n2 = 0;
};

Setup make_setup(const RunConfig& cfg) {
    Setup s;
    s.claim = std::make_shared<ParetoClaim>(cfg.phi);
    s.fhat = std::make_shared<ParetoIntegratedTail>(cfg.phi);
    s.target = cfg.model == 'a' ? s.fhat : s.claim;
    s.n2 = select_n2(*s.target, cfg.t0, cfg.grid_k, cfg.mode, cfg.eps1_target);
    s.pi.emplace(build_scaling(*s.target, GeometricGrid(cfg.t0, cfg.grid_k, s.n2), cfg.mode));
    if (cfg.model == 'b') {
        s.hf = std::make_shared<MomentDistribution>(s.claim);
        s.hpi.emplace(moment_scaling(*s.pi));
    }
    return s;
}

long n1_for(const RunConfig& cfg, const Setup& s, double u) {
    if (u == 0.0) return 0;
    return choose_N1(cfg.xi * u / s.pi->s1(), cfg.n1_tol);
}

ErrorBudget budget_for(const RunConfig& cfg, const Setup& s, double u, long N1, double extra_mass) {
    const DiscreteScaling& pi = *s.pi;
    ErrorBudget b;
    b.parameters = {{"model", std::string(1, cfg.model)}, {"u", u},   {"xi", cfg.xi}, {"rho", cfg.rho},
                    {"phi", cfg.phi},                     {"n1", N1}, {"n2", s.n2},   {"mode", mode_name(cfg.mode)}};
    if (u == 0.0) {
        // psi(0) = rho for every claim law, so the approximation is exact there
        b.finalize();
        return b;
    }
    if (cfg.model == 'a') {
        double direct = erlangization_bound_a_direct(*s.fhat, cfg.xi, cfg.rho, u);
        double rings = erlangization_bound_a(*s.fhat, cfg.xi, cfg.rho, u);
        b.erlangization = std::min(direct, rings);
        auto d = discretization_bound_a_search(*s.fhat, pi, cfg.xi, cfg.rho, u);
        b.discretization = d.value;
        b.parameters["delta"] = d.delta;
        b.truncation = truncation_bound_a(pi.residual_mass() + extra_mass, cfg.rho, cfg.xi, u, pi.s1(), N1);
        b.parameters["eps1"] = pi.residual_mass() + extra_mass;
    } else {
        double simple = erlangization_bound_b_simple(cfg.xi, cfg.rho);
        auto refined = erlangization_bound_b_refined_search(*s.hf, cfg.xi, cfg.rho, u);
        b.erlangization = std::min(simple, std::max(0.0, refined.value));
        b.parameters["delta2"] = refined.delta;
        auto d = discretization_bound_b_search(*s.hf, *s.hpi, cfg.xi, cfg.rho, u);
        b.discretization = d.value;
        b.parameters["delta"] = d.delta;
        b.truncation = truncation_bound_b(pi.residual_mean(), cfg.rho, cfg.xi, u, pi.s1(), pi.stored_mean(), N1);
        b.parameters["eps2"] = pi.residual_mean();
    }
    b.finalize();
    return b;
}

std::string total_cell(double total) { return std::isfinite(total) ? fmt12(total) : "unbounded"; }

void require_long_running(const RunConfig& cfg, const std::vector<double>& us) {
    for (double u : us)
        if (u > kLongRunningU && !cfg.long_running)
            throw DomainError("u = " + fmt12(u) + " needs --long-running (the kappa recursion is quadratic in N1 ~ " +
                              fmt12(cfg.xi * u / std::exp(cfg.t0)) + ")");
}

std::vector<RuinRow> ruin_rows(const RunConfig& cfg, const Setup& s, const std::vector<double>& us,
                               double setup_seconds) {
    auto t_start = Clock::now();
    std::vector<long> n1(us.size());
    long n1_max = 0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        n1[i] = n1_for(cfg, s, us[i]);
        n1_max = std::max(n1_max, n1[i]);
    }
    const DiscreteScaling& pi = *s.pi;
    RiskModel model(cfg.rho);
    auto table = build_coefficients(pi, cfg.xi, n1_max, cfg.model == 'b', cfg.threads);
    KappaSeries ks = cfg.model == 'a' ? kappa_a(table, pi.s1(), model, cfg.threads)
                                      : kappa_b(table, pi.s1(), pi.stored_mean(), model, cfg.threads);
    double shared = setup_seconds + seconds_since(t_start);

    std::vector<RuinRow> rows(us.size());
    parallel_for(us.size(), cfg.threads, [&](std::size_t i) {
        auto t_row = Clock::now();
        RuinRow& r = rows[i];
        r.u = us[i];
        r.n1 = n1[i];
        r.n2 = s.n2;
        r.psi = psi_mix_truncated(ks, us[i], n1[i]);
        auto b = budget_for(cfg, s, us[i], n1[i], table.discarded_mass);
        r.erlangization = b.erlangization;
        r.discretization = b.discretization;
        r.truncation = b.truncation;
        r.total = b.total;
        r.wall_seconds = cfg.timing ? shared + seconds_since(t_row) : 0.0;
    });
    return rows;
}

}  // namespace

void RunConfig::validate() const {
    require(model == 'a' || model == 'b', "model must be 'a' or 'b'");
    require(std::isfinite(phi) && phi > 1.0, "phi must be a finite number greater than 1");
    require(rho > 0.0 && rho < 1.0, "rho must lie strictly between 0 and 1 (net profit condition)");
    require(xi >= 1, "xi must be a positive integer");
    require(std::isfinite(t0), "t0 must be finite");
    require(grid_k >= 1, "grid-k must be a positive integer");
    require(eps1_target > 0.0 && eps1_target < 1.0, "eps1-target must lie in (0, 1)");
    require(n1_tol > 0.0 && n1_tol < 1.0, "n1-tol must lie in (0, 1)");
    require(threads >= 0, "threads must be nonnegative (0 = all cores)");
    require(!u_list.empty(), "at least one u is required");
    for (double u : u_list) require(std::isfinite(u) && u >= 0.0, "every u must be finite and nonnegative");
}

std::vector<RuinRow> compute_ruin(const RunConfig& cfg) {
    cfg.validate();
    require_long_running(cfg, cfg.u_list);
    auto t0 = Clock::now();
    Setup s = make_setup(cfg);
    return ruin_rows(cfg, s, cfg.u_list, seconds_since(t0));
}

std::string cmd_ruin(const RunConfig& cfg) {
    auto rows = compute_ruin(cfg);
    std::string out = "u,psi,erlangization_bound,discretization_bound,truncation_bound,total_bound,n1,n2,wall_seconds\n";
    for (const auto& r : rows)
        out += csv_row({fmt12(r.u), fmt12(r.psi), fmt12(r.erlangization), fmt12(r.discretization),
                        fmt12(r.truncation), total_cell(r.total), std::to_string(r.n1), std::to_string(r.n2),
                        fmt12(r.wall_seconds)});
    return out;
}

std::string cmd_bounds(const RunConfig& cfg) {
    cfg.validate();
    Setup s = make_setup(cfg);
    std::vector<std::string> parts(cfg.u_list.size());
    parallel_for(cfg.u_list.size(), cfg.threads, [&](std::size_t i) {
        double u = cfg.u_list[i];
        std::string csv = budget_for(cfg, s, u, n1_for(cfg, s, u), 0.0).to_csv();
        parts[i] = csv.substr(csv.find('\n') + 1);
    });
    std::string out = "source,value,parameters\n";
    for (const auto& p : parts) out += p;
    return out;
}

std::string cmd_oracle(const RunConfig& cfg, std::uint64_t samples, std::uint64_t seed, int streams) {
    cfg.validate();
    require(samples >= 1, "samples must be positive");
    require(streams >= 1, "streams must be positive");
    ParetoIntegratedTail fhat(cfg.phi);
    auto quantile = [&](double q) { return fhat.quantile(q); };
    OracleConfig oc{samples, seed, streams};
    std::string out = "u,estimate,stderr,ramsay_if_known\n";
    for (double u : cfg.u_list) {
        auto est = simulate_psi(u, cfg.rho, quantile, oc, cfg.threads);
        std::string ref;
        if (cfg.phi == 2.0 && cfg.rho == 0.95) {
            for (const auto& [fu, fv] : ramsay_fixture())
                if (fu == u) ref = fmt12(fv);
        }
        out += csv_row({fmt12(u), fmt12(est.estimate), fmt12(est.std_error), ref});
    }
    return out;
}

std::string cmd_curve(const RunConfig& cfg, int points, double x_min, double x_max) {
    cfg.validate();
    require(points >= 2, "points must be at least 2");
    require(x_min >= 0.0 && std::isfinite(x_max) && x_max > x_min, "need 0 <= x-min < x-max");
    Setup s = make_setup(cfg);
    std::vector<double> xs;
    if (x_min == 0.0) {
        xs.push_back(0.0);
        int rest = points - 1;
        double lo = std::log(x_max) - 4.0 * std::log(10.0);
        for (int i = 0; i < rest; ++i)
            xs.push_back(rest == 1 ? x_max : std::exp(lo + (std::log(x_max) - lo) * i / (rest - 1)));
    } else {
        for (int i = 0; i < points; ++i)
            xs.push_back(std::exp(std::log(x_min) + (std::log(x_max) - std::log(x_min)) * i / (points - 1)));
    }
    xs.back() = x_max;

    std::vector<std::string> lines(xs.size());
    parallel_for(xs.size(), cfg.threads, [&](std::size_t i) {
        double x = xs[i];
        double step, esm;
        if (cfg.model == 'a') {
            step = s.pi->cdf(x);
            esm = mellin_star_cdf(*s.pi, cfg.xi, x);
        } else {
            // H_Pi and its mixture with the integrated Erlang tail, the law approximation B puts in place of F_hat
            const DiscreteScaling& h = *s.hpi;
            step = h.cdf(x);
            esm = 0.0;
            if (x > 0.0)
                for (std::size_t j = 0; j < h.size(); ++j)
                    esm += h.probs()[j] * erlang_integrated_tail(x / h.support()[j], cfg.xi);
        }
        lines[i] = csv_row({fmt12(x), fmt12(s.fhat->cdf(x)), fmt12(step), fmt12(esm)});
    });
    std::string out = "x,fhat,pi_step,esm_cdf\n";
    for (const auto& l : lines) out += l;
    return out;
}

std::string cmd_reproduce(int table, const RunConfig& base) {
    require(table >= 1 && table <= 3, "table must be 1, 2 or 3");
    std::vector<double> us;
    for (const auto& [u, v] : ramsay_fixture()) us.push_back(u);
    RunConfig cfg = base;
    cfg.u_list = us;
    cfg.validate();

    if (table == 1) {
        ParetoIntegratedTail fhat(cfg.phi);
        const int xis[3] = {100, 500, 1000};
        std::vector<double> vals(us.size() * 3);
        parallel_for(vals.size(), cfg.threads, [&](std::size_t k) {
            vals[k] = erlangization_bound_a_direct(fhat, xis[k % 3], cfg.rho, us[k / 3]);
        });
        std::string out = "u,xi_100,xi_500,xi_1000,caveat\n";
        for (std::size_t i = 0; i < us.size(); ++i)
            out += csv_row({fmt12(us[i]), fmt12(vals[3 * i]), fmt12(vals[3 * i + 1]), fmt12(vals[3 * i + 2]),
                            "sup taken on a numeric grid; order of magnitude only"});
        return out;
    }

    if (table == 2) {
        cfg.model = 'a';
        Setup s = make_setup(cfg);
        std::vector<std::pair<double, double>> vals(us.size());
        parallel_for(us.size(), cfg.threads, [&](std::size_t i) {
            double u = us[i];
            vals[i].first = discretization_bound_a(*s.fhat, *s.pi, cfg.xi, cfg.rho, u);
            vals[i].second = truncation_bound_a(s.pi->residual_mass(), cfg.rho, cfg.xi, u, s.pi->s1(), n1_for(cfg, s, u));
        });
        std::string out = "u,discretization,truncation\n";
        for (std::size_t i = 0; i < us.size(); ++i)
            out += csv_row({fmt12(us[i]), fmt12(vals[i].first), fmt12(vals[i].second)});
        return out;
    }

    std::vector<double> run;
    for (double u : us)
        if (u <= kLongRunningU || cfg.long_running) run.push_back(u);
    auto psi_for = [&](char model) {
        RunConfig c = cfg;
        c.model = model;
        Setup s = make_setup(c);
        std::vector<double> psi;
        for (const auto& r : ruin_rows(c, s, run, 0.0)) psi.push_back(r.psi);
        return psi;
    };
    auto a = psi_for('a');
    auto b = psi_for('b');
    std::string out = "u,approx_a,approx_b,ramsay\n";
    for (std::size_t i = 0; i < us.size(); ++i) {
        bool have = i < run.size();
        out += csv_row({fmt12(us[i]), have ? fmt12(a[i]) : "NA", have ? fmt12(b[i]) : "NA",
                        fmt12(ramsay_reference(us[i]))});
    }
    return out;
}

}  // namespace esm
