//==============================================================================
// aggsim: self-organized aggregation of chemotactic bacteria in 1D.
//
//   aggsim mc|ks|asymptotic  --out DIR [--config FILE] [--set k=v ...]
//   aggsim stability         --out DIR [--config FILE] [--set k=v ...]
//   aggsim sweep             --out DIR  --config FILE  [--set k=v ...]
//                            [--workers N]
//
// Exit codes: 0 success, 1 configuration error, 2 numerics error,
// 3 solution blow-up.
//==============================================================================
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aggsim/config.hpp"
#include "aggsim/csv.hpp"
#include "aggsim/errors.hpp"
#include "aggsim/harness.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config, "INI config file");
    cmd->add_option("-o,--out", args.out, "output directory")->required();
    cmd->add_option("-s,--set", args.sets,
                    "override one key: section.key=value (repeatable)");
}

aggsim::ConfigMap make_map(const CommonArgs& args) {
    aggsim::ConfigMap map;
    if (!args.config.empty()) map = aggsim::load_config(args.config);
    for (const std::string& s : args.sets) aggsim::apply_override(map, s);
    return map;
}

int run_single(const CommonArgs& args, aggsim::Engine engine) {
    const aggsim::ConfigMap map = make_map(args);
    const aggsim::Experiment ex = aggsim::build_experiment(map, engine);
    const aggsim::RunResult res = aggsim::run_experiment(ex, args.out);
    std::cout << "engine=" << aggsim::to_string(ex.engine) << " seed=" << ex.seed
              << " steps=" << res.record.steps
              << " t_lambda_end=" << aggsim::csv::format(res.record.t_lambda_end)
              << " delta_rho_bar="
              << aggsim::csv::format(res.record.delta_rho_bar)
              << " classification="
              << (res.has_classification
                      ? aggsim::to_string(res.classification)
                      : std::string("n/a"))
              << "\nwrote " << args.out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"aggregation of chemotactic bacteria: MC / PDE toolkit"};
    app.require_subcommand(1);

    CommonArgs mc_args, ks_args, asym_args, stab_args, sweep_args;
    int workers = 0; // 0 = AGGSIM_WORKERS env or 1

    CLI::App* mc = app.add_subcommand("mc", "stochastic particle run");
    add_common(mc, mc_args);
    CLI::App* ks = app.add_subcommand("ks", "Keller-Segel limit run");
    add_common(ks, ks_args);
    CLI::App* asym =
        app.add_subcommand("asymptotic", "kinetic asymptotic-regime run");
    add_common(asym, asym_args);
    CLI::App* stab =
        app.add_subcommand("stability", "dispersion-relation scan");
    add_common(stab, stab_args);
    CLI::App* sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
    add_common(sweep, sweep_args);
    sweep->add_option("-w,--workers", workers,
                      "worker threads (default: AGGSIM_WORKERS env or 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (mc->parsed()) return run_single(mc_args, aggsim::Engine::mc);
        if (ks->parsed()) return run_single(ks_args, aggsim::Engine::ks);
        if (asym->parsed()) return run_single(asym_args, aggsim::Engine::asymptotic);
        if (stab->parsed()) {
            aggsim::run_stability(make_map(stab_args), stab_args.out);
            std::cout << "wrote " << stab_args.out << '\n';
            return 0;
        }
        if (sweep->parsed()) {
            if (workers == 0) {
                if (const char* env = std::getenv("AGGSIM_WORKERS"))
                    workers = std::atoi(env);
                if (workers <= 0) workers = 1;
            }
            aggsim::run_sweep(make_map(sweep_args), sweep_args.out, workers);
            std::cout << "wrote " << sweep_args.out << '\n';
            return 0;
        }
    } catch (const aggsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const aggsim::BlowupError& e) {
        std::cerr << "blow-up: " << e.what() << '\n';
        return 3;
    } catch (const aggsim::NumericsError& e) {
        std::cerr << "numerics error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
