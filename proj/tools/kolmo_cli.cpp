// kolmo: run verification checks, print constants, dump paths and oracle solutions.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kolmo/checks.hpp"
#include "kolmo/config.hpp"
#include "kolmo/oracle1d.hpp"
#include "kolmo/sde.hpp"

using namespace kolmo;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

int cmd_run(const std::string& path, unsigned threads, const std::string& output) {
    RunConfig cfg = load_config_file(path);
    apply_environment(cfg);
    if (threads) cfg.threads = threads;
    if (!output.empty()) cfg.output = output;
    const Report rep = run_checks(cfg);
    const std::string file = write_report(rep, cfg);
    std::size_t failed = 0;
    for (const auto& r : rep.records) {
        if (!r.pass) ++failed;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.check << ": " << r.item << "  value=" << r.value
                  << " se=" << r.se << " tol=" << r.tolerance << "\n";
    }
    std::cout << rep.records.size() - failed << "/" << rep.records.size() << " records pass; report " << file << "\n";
    return failed ? kExitFail : 0;
}

int cmd_describe(RunConfig cfg) {
    cfg.validate();
    print_constants(constants_table(cfg), cfg, std::cout);
    return 0;
}

int cmd_simulate(const std::string& path, std::size_t paths, const std::string& out, std::size_t max_rows) {
    RunConfig cfg = load_config_file(path);
    apply_environment(cfg);
    cfg.validate();
    const auto drift = build_FN(cfg.nonlinearity(), cfg.noise(), std::make_shared<const Basis>(cfg.n, cfg.m)).eval;
    const Integrator integ(cfg.n, cfg.noise(), cfg.dt, drift);
    SpectralVector x0(cfg.n);
    for (std::size_t k = 0; k < cfg.start.size(); ++k) x0[k] = cfg.start[k];
    const auto ens = ensemble(integ, x0, paths, IntegratorConfig::uniform(cfg.dt, cfg.t, cfg.every), cfg.seed,
                              cfg.threads);
    if (out.empty() || out == "-") {
        write_csv(ens, std::cout, max_rows);
    } else {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write " + out);
        write_csv(ens, f, max_rows);
    }
    return 0;
}

int cmd_oracle(const std::string& preset, double alpha1, double lambda, const std::string& fname,
               std::size_t nodes, const std::string& out) {
    ScalarMap f;
    if (fname == "one") f = [](double) { return 1.0; };
    else if (fname == "x") f = [](double x) { return x; };
    else if (fname == "cos") f = [](double x) { return std::cos(x) + 1.0; };
    else throw ConfigError("unknown function '" + fname + "' (one, x, cos)");
    const NoiseSpec noise(std::vector<double>{alpha1});
    const auto drift = build_FN(NonlinearityModel::preset(preset), noise, 1).eval;
    const DiscreteResolvent op(Mesh1D::build(alpha1, nodes), scalar_drift(drift));
    const auto u = op.solve(f, lambda);
    std::cerr << "R=" << op.mesh().R << " nodes=" << op.mesh().size()
              << " markov_residual=" << markov_residual(op, lambda) << "\n";
    if (out.empty() || out == "-") {
        write_csv(op.mesh(), u, std::cout);
    } else {
        std::ofstream file(out);
        if (!file) throw std::runtime_error("cannot write " + out);
        write_csv(op.mesh(), u, file);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kolmogorov operator verification runner"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the checks listed in a config file");
    std::string run_path, run_output;
    unsigned run_threads = 0;
    run->add_option("config", run_path, "Config file")->required();
    run->add_option("--threads", run_threads, "Override the thread count");
    run->add_option("--output", run_output, "Override the output directory");

    auto* describe = app.add_subcommand("describe", "Print the drift constants of a preset");
    RunConfig dcfg;
    std::string dpreset;
    describe->add_option("preset", dpreset, "Model preset")->required();
    describe->add_option("-N,--modes", dcfg.n, "Galerkin modes")->capture_default_str();
    describe->add_option("-q,--q", dcfg.p, "Lyapunov exponent q")->capture_default_str();
    describe->add_option("--kappa-fraction", dcfg.kappa_fraction, "kappa / kappa0")->capture_default_str();
    describe->add_option("--amplitude", dcfg.amplitude, "Noise amplitude a")->capture_default_str();
    describe->add_option("--exponent", dcfg.exponent, "Noise decay exponent gamma")->capture_default_str();
    describe->add_option("--alpha", dcfg.alpha, "Explicit noise eigenvalues");

    auto* simulate = app.add_subcommand("simulate", "Dump sample paths as CSV");
    std::string sim_path, sim_out;
    std::size_t sim_paths = 4, sim_rows = 0;
    simulate->add_option("config", sim_path, "Config file")->required();
    simulate->add_option("--paths", sim_paths, "Number of paths")->capture_default_str();
    simulate->add_option("--out", sim_out, "Output CSV (stdout if omitted)");
    simulate->add_option("--max-rows", sim_rows, "Row limit, 0 for all")->capture_default_str();

    auto* oracle = app.add_subcommand("oracle1d", "Solve the one-mode resolvent on the mesh");
    std::string o_preset = "ginzburg-landau", o_f = "cos", o_out;
    double o_alpha = 1.0, o_lambda = 5.0;
    std::size_t o_nodes = 2001;
    oracle->add_option("--preset", o_preset, "Model preset")->capture_default_str();
    oracle->add_option("--alpha", o_alpha, "alpha_1")->capture_default_str();
    oracle->add_option("--lambda", o_lambda, "Resolvent parameter")->capture_default_str();
    oracle->add_option("--f", o_f, "Right-hand side: one, x, cos")->capture_default_str();
    oracle->add_option("--nodes", o_nodes, "Mesh nodes")->capture_default_str();
    oracle->add_option("--out", o_out, "Output CSV (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (*run) return cmd_run(run_path, run_threads, run_output);
        if (*describe) {
            dcfg.model = dpreset;
            return cmd_describe(dcfg);
        }
        if (*simulate) return cmd_simulate(sim_path, sim_paths, sim_out, sim_rows);
        if (*oracle) return cmd_oracle(o_preset, o_alpha, o_lambda, o_f, o_nodes, o_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
