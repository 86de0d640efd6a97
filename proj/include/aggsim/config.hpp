#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aggsim/asymptotic.hpp"
#include "aggsim/ks.hpp"
#include "aggsim/mc.hpp"
#include "aggsim/model.hpp"

namespace aggsim {

//==============================================================================
// Config file format: INI sections with one key = value per line.
//
//   [run]    engine = mc | ks | asymptotic; seed
//   [model]  lambda0, tau | alpha, delta | chi_over_delta, chi, D_S, L,
//            sigma, sigma_S       (exclusive pairs: give one of each)
//   [dimensional]  V0, lambda0, tau, D_S, a, b, rho0, L, t0  (alternative to
//            the kinetic keys of [model]; auto-nondimensionalized)
//   [grid]   I
//   [mc]     N_bar, dt, T_lambda | T_end, avg_window, snapshots_tlambda,
//            frozen_gradient, threads, sample_every, runlength_rs,
//            runlength_burnin_tlambda, runlength_sample_every
//   [ks]     regime, dt_max, T_end | T_lambda, perturb_amplitude,
//            perturb_mode, perturb_seed, stop_at_stationary, avg_window,
//            snapshots_tlambda
//   [asymptotic]  K, Y, dt_max, T_end | T_lambda, perturb_*,
//            stop_at_stationary, avg_window, snapshots_tlambda, write_phase
//   [stability]   n_max
//   [sweep]  axis.<section>.<key> = v1, v2, ...  (declaration order = grid
//            nesting, last axis fastest), max_points
//
// '#' and ';' start comments. Lists are comma-separated. Unknown sections or
// keys are errors: flags only override config keys, never invent parameters.
//==============================================================================

struct ConfigEntry {
    std::string key; // "section.key"
    std::string value;
    int line = 0; // 0 = command-line override
};

// Parsed key/value store preserving declaration order (sweep axes nest in the
// order written) with last-resort line numbers for error messages.
struct ConfigMap {
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(const std::string& key) const;
    bool has(const std::string& key) const { return find(key) != nullptr; }
    // Insert or overwrite (overwrite keeps the original position).
    void set(const std::string& key, const std::string& value, int line = 0);
    void erase_section(const std::string& section);
};

// Parses INI text; throws ParseError with 1-based line numbers on malformed
// lines, duplicate keys, or values containing unquotable characters.
ConfigMap parse_ini(const std::string& text);

// Reads and parses a file (ParseError mentions the path).
ConfigMap load_config(const std::string& path);

// Applies one "section.key=value" command-line override.
void apply_override(ConfigMap& map, const std::string& spec);

// Sorted "key = value" lines; the canonical form hashed into the manifest.
std::string canonical_text(const ConfigMap& map);

// FNV-1a 64-bit hash (the documented config-hash function), as 16 hex digits.
std::string config_hash(const ConfigMap& map);

// Typed lookups with defaults; ValidationError on malformed values.
double config_double(const ConfigMap& map, const std::string& key, double dflt);
long long config_int(const ConfigMap& map, const std::string& key, long long dflt);

// Model parameters alone (for the stability scan): full schema check, then
// the same [model] / [dimensional] resolution build_experiment performs.
ModelParams params_from_config(const ConfigMap& map);

enum class Engine { mc, ks, asymptotic };
std::string to_string(Engine e);

// A fully resolved single-run experiment. Engine-specific configs are all
// populated (defaults applied); `engine` selects which one runs.
struct Experiment {
    Engine engine = Engine::mc;
    std::uint64_t seed = 1;
    ModelParams params;
    McConfig mc;
    KsConfig ks;
    AsymptoticConfig asym;
    bool write_phase = false; // asymptotic: dump final p(x,m) table
    // MC run-length diagnostics (empty = off)
    std::vector<double> runlength_rs;
    double runlength_burnin_tlambda = 1.0;
    long runlength_sample_every = 200;

    std::string hash;      // config hash (canonical form)
    std::string canonical; // canonical config text stored in the manifest
};

// Validates keys against the schema, resolves exclusive pairs and defaults,
// and builds every engine config. `forced` is the subcommand's engine; it
// must agree with [run] engine when both are present.
Experiment build_experiment(const ConfigMap& map,
                            std::optional<Engine> forced = std::nullopt);

struct SweepAxis {
    std::string key;                 // override target, e.g. "model.alpha"
    std::vector<std::string> values; // raw value strings
};

struct SweepSpec {
    ConfigMap base;               // [sweep] keys removed
    std::vector<SweepAxis> axes;  // declaration order
    long max_points = 2000;
    long points() const;
    // Override map of grid point p (row-major, last axis fastest).
    ConfigMap point(long p) const;
};

SweepSpec build_sweep(const ConfigMap& map);

} // namespace aggsim
