#include "aggsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "aggsim/chemo.hpp"
#include "aggsim/csv.hpp"
#include "aggsim/diagnostics.hpp"
#include "aggsim/errors.hpp"
#include "aggsim/mc.hpp"

namespace aggsim {

namespace {

constexpr const char* kVersion = "1.0.0";

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir + ": " +
                                  ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// Short time tag for file names: 9 significant digits absorb the one-ulp
// noise of clock arithmetic, so a snapshot at t_lambda = 0.5 is always
// "snapshot_0.5.csv" (data rows keep full round-trip precision).
std::string time_tag(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_manifest(const std::string& path, const std::string& engine,
                    std::uint64_t seed, const std::string& hash,
                    const std::string& canonical) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["engine"] = engine;
    j["seed"] = seed;
    j["config_hash"] = hash;
    j["config"] = canonical;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

// Classification string for a (possibly NaN) time-averaged deviation.
std::string classification_of(double delta_rho_bar) {
    if (std::isnan(delta_rho_bar)) return "n/a";
    return to_string(classify(delta_rho_bar));
}

void write_summary(const std::string& path, const Experiment& ex,
                   const RunRecord& rec) {
    const double drho_final =
        rec.final_rho.values.empty() ? std::nan("") : peak_density(rec.final_rho);
    csv::write_table(
        path,
        {"engine", "seed", "t_end", "t_lambda_end", "steps", "delta_rho_bar",
         "delta_rho_final", "stationary", "stationary_time", "stationary_drho",
         "classification"},
        {{to_string(ex.engine), std::to_string(ex.seed), csv::format(rec.t_end),
          csv::format(rec.t_lambda_end), std::to_string(rec.steps),
          csv::format(rec.delta_rho_bar), csv::format(drho_final),
          fmt_bool(rec.stationary), csv::format(rec.stationary_time),
          csv::format(rec.stationary_drho),
          classification_of(rec.delta_rho_bar)}});
}

void write_bundle(const std::string& out_dir, const Experiment& ex,
                  const RunRecord& rec) {
    write_manifest(join(out_dir, "manifest.json"), to_string(ex.engine), ex.seed,
                   ex.hash, ex.canonical);
    write_summary(join(out_dir, "summary.csv"), ex, rec);
    csv::write_deviation(join(out_dir, "deviation.csv"), rec);
    for (const Snapshot& s : rec.snapshots)
        csv::write_profile(
            join(out_dir, "snapshot_" + time_tag(s.t_lambda) + ".csv"), s.rho,
            s.S);
    if (!rec.final_rho.values.empty())
        csv::write_profile(join(out_dir, "final.csv"), rec.final_rho, rec.final_S);
}

//------------------------------------------------------------------------------
// MC run-length diagnostics: burn in, locate the aggregate, then accumulate
// f_r^+- histograms at the configured distances while the run continues.
//------------------------------------------------------------------------------

struct RunLengthObserver final : McObserver {
    const Grid1D* grid = nullptr;
    long n_bar = 0;
    double x0 = 0.0;
    BinSpec bins{-1.5, 1.5, 101};
    std::vector<double> rs;
    std::vector<InternalHistogram> hists;
    std::vector<char> started;
    long skipped = 0; // samples dropped because a sampled cell was empty

    void on_sample(long long, double, const ParticleEnsemble& ens,
                   const ScalarField&) override {
        for (std::size_t j = 0; j < rs.size(); ++j) {
            try {
                if (!started[j]) {
                    hists[j] =
                        internal_histogram(ens, *grid, n_bar, x0, rs[j], bins);
                    started[j] = 1;
                } else {
                    accumulate_histogram(hists[j], ens, *grid, x0);
                }
            } catch (const EmptySample&) {
                ++skipped;
            }
        }
    }
};

void run_length_outputs(const std::string& out_dir, const Experiment& ex,
                        RunRecord& rec) {
    McConfig cfg = ex.mc;
    cfg.sample_every = ex.runlength_sample_every;
    const double burnin = ex.runlength_burnin_tlambda * cfg.params.lambda0 *
                          cfg.params.L * cfg.params.L;
    if (burnin >= cfg.horizon())
        throw ValidationError("mc.runlength_burnin_tlambda exceeds the horizon");

    McEngine engine(cfg);
    engine.advance_to(burnin);

    RunLengthObserver obs;
    obs.grid = &cfg.grid;
    obs.n_bar = cfg.N_bar;
    obs.x0 = find_center(engine.field_S());
    const ScalarField g = gradient_log(engine.field_S());
    double gmax = 0.0;
    for (double v : g.values) gmax = std::max(gmax, std::abs(v));
    const double span = 1.5 * cfg.params.tau * std::max(gmax, 1e-12);
    obs.bins = BinSpec{-span, span, 101};
    obs.rs = ex.runlength_rs;
    obs.hists.resize(obs.rs.size());
    obs.started.assign(obs.rs.size(), 0);

    engine.advance_to(cfg.horizon(), &obs);

    rec = engine.record();
    if (cfg.T_lambda > 0.0) {
        try {
            rec.delta_rho_bar = time_avg_deviation(rec.deviation, cfg.T_lambda);
        } catch (const InsufficientCoverage&) {
        }
    }

    std::vector<std::vector<std::string>> rows;
    for (std::size_t j = 0; j < obs.rs.size(); ++j) {
        const InternalHistogram& h = obs.hists[j];
        double xp = std::nan(""), xm = std::nan(""), rho_r = std::nan("");
        long ns = 0;
        if (obs.started[j]) {
            const auto xi = mean_run_length(h, cfg.params);
            xp = xi.first;
            xm = xi.second;
            rho_r = h.rho_r;
            ns = h.n_samples;
            std::vector<std::vector<std::string>> hrows;
            for (int b = 0; b < h.bins.n; ++b)
                hrows.push_back({csv::format(h.bins.center(b)),
                                 csv::format(h.f_plus(b)),
                                 csv::format(h.f_minus(b))});
            csv::write_table(
                join(out_dir, "hist_r" + time_tag(obs.rs[j]) + ".csv"),
                {"y", "f_plus", "f_minus"}, hrows);
        }
        rows.push_back({csv::format(obs.rs[j]), csv::format(rho_r),
                        csv::format(xp), csv::format(xm), std::to_string(ns)});
    }
    csv::write_table(join(out_dir, "runlengths.csv"),
                     {"r", "rho_r", "xi_plus", "xi_minus", "samples"}, rows);
}

void write_phase_table(const std::string& path, const PhaseDensity& p) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<std::size_t>(p.grid.I) * p.m.K);
    for (int i = 0; i < p.grid.I; ++i)
        for (int k = 0; k < p.m.K; ++k)
            rows.push_back({csv::format(p.grid.center(i)),
                            csv::format(p.m.center(k)),
                            csv::format(p.at(i, k))});
    csv::write_table(path, {"x", "m", "p"}, rows);
}

} // namespace

//==============================================================================
// Single experiment
//==============================================================================

RunRecord execute(const Experiment& ex) {
    switch (ex.engine) {
        case Engine::mc: return run_mc(ex.mc);
        case Engine::ks: return run_ks(ex.ks);
        case Engine::asymptotic: return run_asymptotic(ex.asym);
    }
    throw ValidationError("unreachable engine");
}

RunResult run_experiment(const Experiment& ex, const std::string& out_dir) {
    ensure_dir(out_dir);
    RunResult res;
    if (ex.engine == Engine::mc && !ex.runlength_rs.empty()) {
        run_length_outputs(out_dir, ex, res.record);
    } else if (ex.engine == Engine::asymptotic && ex.write_phase) {
        PhaseDensity p_final;
        res.record = run_asymptotic(ex.asym, &p_final);
        write_phase_table(join(out_dir, "phase_final.csv"), p_final);
    } else {
        res.record = execute(ex);
    }
    if (!std::isnan(res.record.delta_rho_bar)) {
        res.has_classification = true;
        res.classification = classify(res.record.delta_rho_bar);
    }
    write_bundle(out_dir, ex, res.record);
    return res;
}

//==============================================================================
// Stability scan
//==============================================================================

void run_stability(const ConfigMap& map, const std::string& out_dir) {
    const ModelParams p = params_from_config(map);
    const long long n_max = config_int(map, "stability.n_max", 10);
    if (n_max < 1) throw ValidationError("stability.n_max must be >= 1");

    ensure_dir(out_dir);
    const double alpha = p.lambda0 * p.tau;
    std::vector<std::vector<std::string>> rows;
    for (long long n = 1; n <= n_max; ++n) {
        const double k = 2.0 * M_PI * static_cast<double>(n) / p.L;
        const double mu = growth_rate({k, alpha, p.chi, p.delta, p.D_S});
        const double crit = critical_stiffness(k, alpha, p.D_S);
        rows.push_back({std::to_string(n), csv::format(k), csv::format(mu),
                        csv::format(crit)});
    }
    csv::write_table(join(out_dir, "stability.csv"),
                     {"n", "k", "mu", "crit_chi_over_delta"}, rows);

    const UnstableMode m = most_unstable_mode(p, p.L, static_cast<int>(n_max));
    csv::write_table(join(out_dir, "stability_summary.csv"),
                     {"all_stable", "n_star", "k_star", "mu_star"},
                     {{fmt_bool(m.all_stable), std::to_string(m.n),
                       csv::format(m.k), csv::format(m.mu)}});

    write_manifest(join(out_dir, "manifest.json"), "stability",
                   static_cast<std::uint64_t>(config_int(map, "run.seed", 1)),
                   config_hash(map), canonical_text(map));
}

//==============================================================================
// Sweeps
//==============================================================================

namespace {

// One sweep row; exceptions become the status column so a single diverging
// point cannot kill a long sweep.
std::vector<std::string> sweep_row(const SweepSpec& spec, long pt) {
    const ConfigMap pm = spec.point(pt);
    std::vector<std::string> row;
    for (const SweepAxis& a : spec.axes) row.push_back(pm.find(a.key)->value);
    try {
        const Experiment ex = build_experiment(pm);
        const RunRecord rec = execute(ex);
        const double drho_final = rec.final_rho.values.empty()
                                      ? std::nan("")
                                      : peak_density(rec.final_rho);
        row.push_back(csv::format(rec.delta_rho_bar));
        row.push_back(csv::format(drho_final));
        row.push_back(classification_of(rec.delta_rho_bar));
        row.push_back("ok");
    } catch (const std::exception& e) {
        std::string what = e.what();
        std::replace(what.begin(), what.end(), ',', ';');
        row.push_back("nan");
        row.push_back("nan");
        row.push_back("n/a");
        row.push_back("error: " + what);
    }
    return row;
}

} // namespace

void run_sweep(const ConfigMap& map, const std::string& out_dir, int workers) {
    const SweepSpec spec = build_sweep(map);
    if (!spec.base.has("run.engine"))
        throw ValidationError("sweep config must set [run] engine");
    const long P = spec.points();
    ensure_dir(out_dir);

    std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(P));
    std::vector<double> wall_ms(static_cast<std::size_t>(P), 0.0);

    const auto work = [&](long pt) {
        const auto t0 = std::chrono::steady_clock::now();
        rows[static_cast<std::size_t>(pt)] = sweep_row(spec, pt);
        const auto t1 = std::chrono::steady_clock::now();
        wall_ms[static_cast<std::size_t>(pt)] =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
    };

    if (workers <= 1) {
        for (long pt = 0; pt < P; ++pt) work(pt);
    } else {
        std::atomic<long> next{0};
        std::vector<std::thread> pool;
        const int nw = static_cast<int>(std::min<long>(workers, P));
        pool.reserve(static_cast<std::size_t>(nw));
        for (int w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (long pt = next.fetch_add(1); pt < P; pt = next.fetch_add(1))
                    work(pt);
            });
        for (std::thread& t : pool) t.join();
    }

    std::vector<std::string> header;
    for (const SweepAxis& a : spec.axes) header.push_back(a.key);
    header.insert(header.end(), {"delta_rho_bar", "delta_rho_final",
                                 "classification", "status"});
    csv::write_table(join(out_dir, "sweep.csv"), header, rows);

    std::vector<std::vector<std::string>> trows;
    for (long pt = 0; pt < P; ++pt)
        trows.push_back({std::to_string(pt),
                         csv::format(wall_ms[static_cast<std::size_t>(pt)])});
    csv::write_table(join(out_dir, "sweep_timing.csv"), {"point", "wall_ms"},
                     trows);

    write_manifest(join(out_dir, "manifest.json"), "sweep",
                   static_cast<std::uint64_t>(config_int(map, "run.seed", 1)),
                   config_hash(map), canonical_text(map));
}

} // namespace aggsim
