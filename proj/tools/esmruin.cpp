#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "esmruin/commands.hpp"
#include "esmruin/errors.hpp"

namespace {

struct Shared {
    esm::RunConfig cfg;
    std::string model = "a";
    std::string mode = "below";
    bool no_timing = false;
    std::string out;
};

void add_model_options(CLI::App* cmd, Shared& s, bool with_u) {
    cmd->add_option("--model", s.model, "a: scale mixture of F_hat; b: moment-based mixture")
        ->check(CLI::IsMember({"a", "b"}))
        ->capture_default_str();
    cmd->add_option("--phi", s.cfg.phi, "Pareto shape")->capture_default_str();
    cmd->add_option("--rho", s.cfg.rho, "traffic intensity")->capture_default_str();
    cmd->add_option("--xi", s.cfg.xi, "Erlang order")->capture_default_str();
    cmd->add_option("--t0", s.cfg.t0, "log of the first scaling atom")->capture_default_str();
    cmd->add_option("--grid-k", s.cfg.grid_k, "atoms per unit of log-scale")->capture_default_str();
    cmd->add_option("--eps1-target", s.cfg.eps1_target, "residual mass target for N2")->capture_default_str();
    cmd->add_option("--n1-tol", s.cfg.n1_tol, "Poisson tail tolerance for N1")->capture_default_str();
    cmd->add_option("--mode", s.mode, "cell rule: above, below, middle, arith-middle")
        ->check(CLI::IsMember({"above", "below", "middle", "arith-middle"}))
        ->capture_default_str();
    cmd->add_option("--threads", s.cfg.threads, "worker threads, 0 = all cores")->capture_default_str();
    cmd->add_flag("--long-running", s.cfg.long_running, "allow u > 100");
    cmd->add_flag("--no-timing", s.no_timing, "write wall_seconds as 0");
    cmd->add_option("--out", s.out, "output file (default stdout)");
    if (with_u) cmd->add_option("--u", s.cfg.u_list, "initial capital values")->delimiter(',')->capture_default_str();
}

esm::RunConfig finish(Shared& s) {
    s.cfg.model = s.model[0];
    s.cfg.mode = esm::parse_mode(s.mode);
    s.cfg.timing = !s.no_timing;
    return s.cfg;
}

int emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return 0;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot open " << path << " for writing\n";
        return 2;
    }
    f << text;
    return f ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ruin probabilities for heavy-tailed Cramer-Lundberg models by Erlangized scale mixtures"};
    app.require_subcommand(1);

    Shared ruin, bounds, oracle, curve, repro;
    auto* c_ruin = app.add_subcommand("ruin", "psi(u) with its error budget");
    add_model_options(c_ruin, ruin, true);
    auto* c_bounds = app.add_subcommand("bounds", "error budget only");
    add_model_options(c_bounds, bounds, true);

    auto* c_oracle = app.add_subcommand("oracle", "Monte Carlo estimate of psi(u)");
    add_model_options(c_oracle, oracle, true);
    std::uint64_t samples = 1000000, seed = 20240601;
    int streams = 64;
    c_oracle->add_option("--samples", samples)->capture_default_str();
    c_oracle->add_option("--seed", seed)->capture_default_str();
    c_oracle->add_option("--streams", streams)->capture_default_str();

    auto* c_curve = app.add_subcommand("curve", "F_hat against its step law and scale mixture");
    add_model_options(c_curve, curve, false);
    int points = 200;
    double x_min = 0.0, x_max = 10.0;
    c_curve->add_option("--points", points)->capture_default_str();
    c_curve->add_option("--x-min", x_min)->capture_default_str();
    c_curve->add_option("--x-max", x_max)->capture_default_str();

    auto* c_repro = app.add_subcommand("reproduce", "benchmark tables");
    add_model_options(c_repro, repro, false);
    int table = 3;
    c_repro->add_option("--table", table, "1, 2 or 3")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*c_ruin) return emit(esm::cmd_ruin(finish(ruin)), ruin.out);
        if (*c_bounds) return emit(esm::cmd_bounds(finish(bounds)), bounds.out);
        if (*c_oracle) return emit(esm::cmd_oracle(finish(oracle), samples, seed, streams), oracle.out);
        if (*c_curve) return emit(esm::cmd_curve(finish(curve), points, x_min, x_max), curve.out);
        if (*c_repro) return emit(esm::cmd_reproduce(table, finish(repro)), repro.out);
    } catch (const esm::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
