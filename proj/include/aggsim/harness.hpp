#pragma once
#include <string>

#include "aggsim/config.hpp"
#include "aggsim/record.hpp"
#include "aggsim/stability.hpp"

namespace aggsim {

//==============================================================================
// Run harness: executes a configured experiment and writes the output bundle.
// All data files come out of csv.hpp / a canonical JSON dump, so a given
// config produces byte-identical bundles (timing files excepted).
//==============================================================================

// Runs the experiment's engine in memory; no files are written. This is the
// execution path the sweep uses per grid point.
RunRecord execute(const Experiment& ex);

struct RunResult {
    RunRecord record;
    bool has_classification = false; // false when delta_rho_bar is NaN
    Stability classification = Stability::stable;
};

// Runs the engine and writes into out_dir (created if needed):
//   manifest.json              version, engine, seed, config hash, canonical
//                              config text
//   summary.csv                one-row scalar summary
//   deviation.csv              per-window series
//   snapshot_<t_lambda>.csv    scheduled profiles
//   final.csv                  final profiles
//   runlengths.csv, hist_r<r>.csv   MC run-length diagnostics (mc.runlength_rs)
//   phase_final.csv            asymptotic phase density (asymptotic.write_phase)
RunResult run_experiment(const Experiment& ex, const std::string& out_dir);

// Dispersion-relation scan for the configured model parameters. Writes
// stability.csv (n,k,mu,crit_chi_over_delta for n = 1..n_max),
// stability_summary.csv and manifest.json.
void run_stability(const ConfigMap& map, const std::string& out_dir);

// Cartesian parameter sweep. One row per grid point in declaration order
// (first axis outermost); per-point failures land in the row's status column
// and the sweep continues. Writes sweep.csv (axis columns + delta_rho_bar,
// delta_rho_final, classification, status), sweep_timing.csv (wall clock;
// the one non-deterministic file) and manifest.json. workers <= 1 runs
// serially; larger values use that many threads, rows merged in point order.
void run_sweep(const ConfigMap& map, const std::string& out_dir, int workers = 1);

} // namespace aggsim
