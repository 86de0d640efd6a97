#include "aggsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace aggsim {

//==============================================================================
// Low-level INI machinery
//==============================================================================

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    std::ostringstream os;
    os << "config line " << line << ": " << what;
    throw ParseError(os.str());
}

bool valid_key_chars(const std::string& k) {
    if (k.empty() || !(std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_'))
        return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
            return false;
    return true;
}

double parse_double(const ConfigEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0') {
        std::ostringstream os;
        os << "key " << e.key << " (line " << e.line << "): '" << e.value
           << "' is not a number";
        throw ValidationError(os.str());
    }
    return v;
}

long long parse_int(const ConfigEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    const long long v = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0') {
        std::ostringstream os;
        os << "key " << e.key << " (line " << e.line << "): '" << e.value
           << "' is not an integer";
        throw ValidationError(os.str());
    }
    return v;
}

bool parse_bool(const ConfigEntry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    std::ostringstream os;
    os << "key " << e.key << " (line " << e.line << "): '" << e.value
       << "' is not a boolean";
    throw ValidationError(os.str());
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        std::size_t c = v.find(',', pos);
        if (c == std::string::npos) c = v.size();
        out.push_back(trim(v.substr(pos, c - pos)));
        pos = c + 1;
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

std::vector<double> parse_double_list(const ConfigEntry& e) {
    std::vector<double> out;
    for (const std::string& tok : split_list(e.value)) {
        ConfigEntry tmp{e.key, tok, e.line};
        out.push_back(parse_double(tmp));
    }
    return out;
}

// Typed getters with defaults ----------------------------------------------

double get_double(const ConfigMap& m, const std::string& k, double dflt) {
    const ConfigEntry* e = m.find(k);
    return e ? parse_double(*e) : dflt;
}

long long get_int(const ConfigMap& m, const std::string& k, long long dflt) {
    const ConfigEntry* e = m.find(k);
    return e ? parse_int(*e) : dflt;
}

bool get_bool(const ConfigMap& m, const std::string& k, bool dflt) {
    const ConfigEntry* e = m.find(k);
    return e ? parse_bool(*e) : dflt;
}

std::vector<double> get_double_list(const ConfigMap& m, const std::string& k) {
    const ConfigEntry* e = m.find(k);
    return e ? parse_double_list(*e) : std::vector<double>{};
}

// Exactly-one-of helper for the alternative parameterizations.
void reject_both(const ConfigMap& m, const std::string& a, const std::string& b) {
    if (m.has(a) && m.has(b))
        throw ValidationError("keys " + a + " and " + b +
                              " are alternatives; give only one");
}

//==============================================================================
// Key schema
//==============================================================================

const char* const kSchema[] = {
    "run.engine", "run.seed",
    "model.lambda0", "model.tau", "model.alpha", "model.delta",
    "model.chi_over_delta", "model.chi", "model.D_S", "model.L", "model.sigma",
    "model.sigma_S",
    "dimensional.V0", "dimensional.lambda0", "dimensional.tau",
    "dimensional.D_S", "dimensional.a", "dimensional.b", "dimensional.rho0",
    "dimensional.L", "dimensional.t0",
    "grid.I",
    "mc.N_bar", "mc.dt", "mc.T_lambda", "mc.T_end", "mc.avg_window",
    "mc.snapshots_tlambda", "mc.frozen_gradient", "mc.threads",
    "mc.sample_every", "mc.runlength_rs", "mc.runlength_burnin_tlambda",
    "mc.runlength_sample_every",
    "ks.regime", "ks.dt_max", "ks.T_end", "ks.T_lambda", "ks.perturb_amplitude",
    "ks.perturb_mode", "ks.perturb_seed", "ks.stop_at_stationary",
    "ks.avg_window", "ks.snapshots_tlambda",
    "asymptotic.K", "asymptotic.Y", "asymptotic.dt_max", "asymptotic.T_end",
    "asymptotic.T_lambda", "asymptotic.perturb_amplitude",
    "asymptotic.perturb_mode", "asymptotic.perturb_seed",
    "asymptotic.stop_at_stationary", "asymptotic.avg_window",
    "asymptotic.snapshots_tlambda", "asymptotic.write_phase",
    "stability.n_max",
    "sweep.max_points",
};

bool key_in_schema(const std::string& k) {
    for (const char* s : kSchema)
        if (k == s) return true;
    return false;
}

void check_schema(const ConfigMap& m) {
    std::string bad;
    for (const ConfigEntry& e : m.entries) {
        if (key_in_schema(e.key)) continue;
        if (e.key.rfind("sweep.axis.", 0) == 0) {
            const std::string target = e.key.substr(11);
            if (target == "run.engine")
                throw ValidationError("sweeping run.engine is not supported");
            if (!key_in_schema(target))
                throw ValidationError("sweep axis targets unknown key: " + target);
            continue;
        }
        if (!bad.empty()) bad += ", ";
        bad += e.key;
        if (e.line > 0) bad += " (line " + std::to_string(e.line) + ")";
    }
    if (!bad.empty()) throw ValidationError("unknown config keys: " + bad);
}

} // namespace

//==============================================================================
// ConfigMap
//==============================================================================

const ConfigEntry* ConfigMap::find(const std::string& key) const {
    for (const ConfigEntry& e : entries)
        if (e.key == key) return &e;
    return nullptr;
}

void ConfigMap::set(const std::string& key, const std::string& value, int line) {
    for (ConfigEntry& e : entries) {
        if (e.key == key) {
            e.value = value;
            e.line = line;
            return;
        }
    }
    entries.push_back({key, value, line});
}

void ConfigMap::erase_section(const std::string& section) {
    const std::string prefix = section + ".";
    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [&](const ConfigEntry& e) {
                                     return e.key.rfind(prefix, 0) == 0;
                                 }),
                  entries.end());
}

ConfigMap parse_ini(const std::string& text) {
    ConfigMap map;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        // comments start at '#' or ';'
        std::size_t cpos = raw.find_first_of("#;");
        std::string line = trim(cpos == std::string::npos ? raw : raw.substr(0, cpos));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') parse_fail(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_key_chars(section))
                parse_fail(lineno, "malformed section name '" + section + "'");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            parse_fail(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_key_chars(key)) parse_fail(lineno, "malformed key '" + key + "'");
        if (value.empty()) parse_fail(lineno, "empty value for key '" + key + "'");
        if (section.empty()) parse_fail(lineno, "key '" + key + "' outside any section");
        const std::string full = section + "." + key;
        if (const ConfigEntry* prev = map.find(full))
            parse_fail(lineno, "duplicate key '" + full + "' (first at line " +
                                   std::to_string(prev->line) + ")");
        map.entries.push_back({full, value, lineno});
    }
    return map;
}

ConfigMap load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_ini(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void apply_override(ConfigMap& map, const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos)
        throw ParseError("--set expects section.key=value, got '" + spec + "'");
    const std::string key = trim(spec.substr(0, eq));
    const std::string value = trim(spec.substr(eq + 1));
    if (!valid_key_chars(key) || key.find('.') == std::string::npos)
        throw ParseError("--set key must be section.key, got '" + key + "'");
    if (value.empty()) throw ParseError("--set value for '" + key + "' is empty");
    map.set(key, value, 0);
}

std::string canonical_text(const ConfigMap& map) {
    std::vector<const ConfigEntry*> ordered;
    ordered.reserve(map.entries.size());
    for (const ConfigEntry& e : map.entries) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(),
              [](const ConfigEntry* a, const ConfigEntry* b) { return a->key < b->key; });
    std::string out;
    for (const ConfigEntry* e : ordered) {
        out += e->key;
        out += " = ";
        out += e->value;
        out += '\n';
    }
    return out;
}

std::string config_hash(const ConfigMap& map) {
    const std::string text = canonical_text(map);
    std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a 64
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string to_string(Engine e) {
    switch (e) {
        case Engine::mc: return "mc";
        case Engine::ks: return "ks";
        case Engine::asymptotic: return "asymptotic";
    }
    return "?";
}

//==============================================================================
// Experiment building
//==============================================================================

namespace {

Engine parse_engine(const std::string& s) {
    if (s == "mc") return Engine::mc;
    if (s == "ks") return Engine::ks;
    if (s == "asymptotic") return Engine::asymptotic;
    throw ValidationError("unknown engine '" + s + "' (mc | ks | asymptotic)");
}

KsRegime parse_regime(const std::string& s) {
    if (s == "fast") return KsRegime::fast;
    if (s == "very_fast") return KsRegime::very_fast;
    if (s == "moderate") return KsRegime::moderate;
    throw ValidationError("unknown KS regime '" + s +
                          "' (fast | very_fast | moderate)");
}

ModelParams build_params(const ConfigMap& m) {
    bool dimensional = false;
    for (const ConfigEntry& e : m.entries)
        if (e.key.rfind("dimensional.", 0) == 0) dimensional = true;

    reject_both(m, "model.delta", "model.chi_over_delta");
    const double chi = get_double(m, "model.chi", 0.5);
    double delta;
    if (m.has("model.chi_over_delta")) {
        const double cod = parse_double(*m.find("model.chi_over_delta"));
        if (!(cod > 0)) throw ValidationError("model.chi_over_delta must be > 0");
        delta = chi / cod;
    } else {
        delta = get_double(m, "model.delta", 0.1);
    }

    if (dimensional) {
        static const char* kinetic[] = {"model.lambda0", "model.tau", "model.alpha",
                                        "model.D_S", "model.L", "model.sigma",
                                        "model.sigma_S"};
        for (const char* k : kinetic)
            if (m.has(k))
                throw ValidationError(std::string(k) +
                                      " conflicts with the [dimensional] section");
        static const char* required[] = {"dimensional.V0", "dimensional.lambda0",
                                         "dimensional.tau", "dimensional.D_S",
                                         "dimensional.a", "dimensional.L"};
        for (const char* k : required)
            if (!m.has(k))
                throw ValidationError(std::string("missing required key ") + k);
        DimensionalParams d;
        d.V0 = parse_double(*m.find("dimensional.V0"));
        d.lambda0_dim = parse_double(*m.find("dimensional.lambda0"));
        d.tau_dim = parse_double(*m.find("dimensional.tau"));
        d.D_S_dim = parse_double(*m.find("dimensional.D_S"));
        d.a = parse_double(*m.find("dimensional.a"));
        d.b = get_double(m, "dimensional.b", 1.0);
        d.rho0 = get_double(m, "dimensional.rho0", 1.0);
        d.L_dim = parse_double(*m.find("dimensional.L"));
        if (!(d.a > 0)) throw ValidationError("dimensional.a must be > 0");
        d.t0 = get_double(m, "dimensional.t0", 1.0 / d.a);
        return nondimensionalize(d, chi, delta);
    }

    reject_both(m, "model.tau", "model.alpha");
    const double lambda0 = get_double(m, "model.lambda0", 10.0);
    double tau;
    if (m.has("model.alpha")) {
        if (!(lambda0 > 0)) throw ValidationError("model.lambda0 must be > 0");
        tau = parse_double(*m.find("model.alpha")) / lambda0;
    } else {
        tau = get_double(m, "model.tau", 0.1);
    }
    return ModelParams::make(lambda0, tau, delta, chi,
                             get_double(m, "model.D_S", 1.0),
                             get_double(m, "model.L", 10.0),
                             get_double(m, "model.sigma", 1.0),
                             get_double(m, "model.sigma_S", 1.0));
}

// Paper-parity MC defaults: dt by lambda0 tier; N_bar and I switch at the
// stiff high-frequency corner (lambda0 >= 500 with delta <= 0.01).
double default_mc_dt(double lambda0) {
    if (lambda0 < 100.0) return 1e-3;
    if (lambda0 <= 200.0) return 2e-4;
    return 5e-5;
}

bool stiff_corner(const ModelParams& p) {
    return p.lambda0 >= 500.0 && p.delta <= 0.010000001;
}

} // namespace

double config_double(const ConfigMap& map, const std::string& key, double dflt) {
    return get_double(map, key, dflt);
}

long long config_int(const ConfigMap& map, const std::string& key, long long dflt) {
    return get_int(map, key, dflt);
}

ModelParams params_from_config(const ConfigMap& map) {
    check_schema(map);
    ModelParams p = build_params(map);
    require_valid(p);
    return p;
}

Experiment build_experiment(const ConfigMap& map, std::optional<Engine> forced) {
    check_schema(map);
    for (const ConfigEntry& e : map.entries)
        if (e.key.rfind("sweep.", 0) == 0)
            throw ValidationError(
                "config contains [sweep] keys; use the sweep subcommand");

    Experiment ex;
    if (const ConfigEntry* e = map.find("run.engine")) {
        ex.engine = parse_engine(e->value);
        if (forced && *forced != ex.engine)
            throw ValidationError("config sets engine = " + to_string(ex.engine) +
                                  " but the " + to_string(*forced) +
                                  " subcommand was invoked");
    } else if (forced) {
        ex.engine = *forced;
    } else {
        throw ValidationError("no engine: set [run] engine or use a subcommand");
    }

    const long long seed = get_int(map, "run.seed", 1);
    if (seed < 0) throw ValidationError("run.seed must be >= 0");
    ex.seed = static_cast<std::uint64_t>(seed);

    ex.params = build_params(map);
    require_valid(ex.params);

    long long I = get_int(map, "grid.I", 0);
    if (I == 0)
        I = (ex.engine == Engine::mc && stiff_corner(ex.params)) ? 100 : 50;
    if (I < 4) throw ValidationError("grid.I must be >= 4");
    const Grid1D grid(static_cast<int>(I), ex.params.L);

    // --- MC ------------------------------------------------------------
    {
        McConfig& c = ex.mc;
        c.params = ex.params;
        c.grid = grid;
        c.seed = ex.seed;
        c.N_bar = get_int(map, "mc.N_bar", stiff_corner(ex.params) ? 7400 : 28800);
        c.dt = get_double(map, "mc.dt", default_mc_dt(ex.params.lambda0));
        reject_both(map, "mc.T_lambda", "mc.T_end");
        if (map.has("mc.T_end")) {
            c.T_end = parse_double(*map.find("mc.T_end"));
            c.T_lambda = 0.0;
        } else {
            c.T_lambda = get_double(map, "mc.T_lambda", 10.0);
            c.T_end = 0.0;
        }
        c.avg_window = get_double(map, "mc.avg_window", 0.05);
        c.snapshots_tlambda = get_double_list(map, "mc.snapshots_tlambda");
        c.threads = static_cast<int>(get_int(map, "mc.threads", 1));
        c.sample_every = get_int(map, "mc.sample_every", 0);
        if (map.has("mc.frozen_gradient"))
            c.frozen_gradient = parse_double(*map.find("mc.frozen_gradient"));
    }

    // --- KS ------------------------------------------------------------
    {
        KsConfig& c = ex.ks;
        c.params = ex.params;
        c.grid = grid;
        if (const ConfigEntry* e = map.find("ks.regime"))
            c.regime = parse_regime(e->value);
        c.dt_max = get_double(map, "ks.dt_max", 0.0);
        reject_both(map, "ks.T_end", "ks.T_lambda");
        if (map.has("ks.T_lambda"))
            c.T_end = parse_double(*map.find("ks.T_lambda")) * ex.params.L * ex.params.L;
        else
            c.T_end = get_double(map, "ks.T_end", 10.0);
        c.perturbation.amplitude = get_double(map, "ks.perturb_amplitude", 1e-2);
        c.perturbation.mode = static_cast<int>(get_int(map, "ks.perturb_mode", 1));
        c.perturbation.seed = static_cast<std::uint64_t>(
            get_int(map, "ks.perturb_seed", static_cast<long long>(ex.seed)));
        c.stop_at_stationary = get_bool(map, "ks.stop_at_stationary", false);
        c.avg_window = get_double(map, "ks.avg_window", 0.05);
        c.snapshots_tlambda = get_double_list(map, "ks.snapshots_tlambda");
    }

    // --- asymptotic ------------------------------------------------------
    {
        AsymptoticConfig& c = ex.asym;
        c.params = ex.params;
        c.grid = grid;
        c.m_axis.K = static_cast<int>(get_int(map, "asymptotic.K", 200));
        c.m_axis.Y = get_double(map, "asymptotic.Y", 0.0);
        c.dt_max = get_double(map, "asymptotic.dt_max", 0.0);
        reject_both(map, "asymptotic.T_end", "asymptotic.T_lambda");
        if (map.has("asymptotic.T_lambda"))
            c.T_end = parse_double(*map.find("asymptotic.T_lambda")) * ex.params.L *
                      ex.params.L;
        else
            c.T_end = get_double(map, "asymptotic.T_end", 10.0);
        c.perturbation.amplitude =
            get_double(map, "asymptotic.perturb_amplitude", 1e-2);
        c.perturbation.mode =
            static_cast<int>(get_int(map, "asymptotic.perturb_mode", 1));
        c.perturbation.seed = static_cast<std::uint64_t>(get_int(
            map, "asymptotic.perturb_seed", static_cast<long long>(ex.seed)));
        c.stop_at_stationary = get_bool(map, "asymptotic.stop_at_stationary", false);
        c.avg_window = get_double(map, "asymptotic.avg_window", 0.05);
        c.snapshots_tlambda = get_double_list(map, "asymptotic.snapshots_tlambda");
        ex.write_phase = get_bool(map, "asymptotic.write_phase", false);
    }

    ex.runlength_rs = get_double_list(map, "mc.runlength_rs");
    ex.runlength_burnin_tlambda =
        get_double(map, "mc.runlength_burnin_tlambda", 1.0);
    ex.runlength_sample_every = get_int(map, "mc.runlength_sample_every", 200);
    if (!ex.runlength_rs.empty() && ex.engine != Engine::mc)
        throw ValidationError("mc.runlength_rs requires engine = mc");
    if (ex.runlength_sample_every < 1)
        throw ValidationError("mc.runlength_sample_every must be >= 1");

    ConfigMap effective = map;
    effective.set("run.engine", to_string(ex.engine));
    ex.canonical = canonical_text(effective);
    ex.hash = config_hash(effective);
    return ex;
}

//==============================================================================
// Sweeps
//==============================================================================

long SweepSpec::points() const {
    long n = 1;
    for (const SweepAxis& a : axes) {
        if (a.values.empty()) return 0;
        if (n > max_points) break; // avoid overflow; caller rejects anyway
        n *= static_cast<long>(a.values.size());
    }
    return n;
}

ConfigMap SweepSpec::point(long p) const {
    ConfigMap m = base;
    long rem = p;
    for (std::size_t j = axes.size(); j-- > 0;) {
        const long s = static_cast<long>(axes[j].values.size());
        m.set(axes[j].key, axes[j].values[rem % s], 0);
        rem /= s;
    }
    return m;
}

SweepSpec build_sweep(const ConfigMap& map) {
    check_schema(map);
    SweepSpec spec;
    spec.max_points = get_int(map, "sweep.max_points", 2000);
    if (spec.max_points < 1)
        throw ValidationError("sweep.max_points must be >= 1");
    for (const ConfigEntry& e : map.entries) {
        if (e.key.rfind("sweep.axis.", 0) != 0) continue;
        SweepAxis axis;
        axis.key = e.key.substr(11);
        for (const std::string& v : split_list(e.value))
            if (!v.empty()) axis.values.push_back(v);
        if (axis.values.empty())
            throw ValidationError("sweep axis " + axis.key + " has no values");
        spec.axes.push_back(std::move(axis));
    }
    if (spec.axes.empty())
        throw ValidationError("sweep config needs at least one sweep.axis.* key");
    spec.base = map;
    spec.base.erase_section("sweep");
    if (spec.points() > spec.max_points) {
        std::ostringstream os;
        os << "sweep has " << spec.points() << " points, above the cap "
           << spec.max_points << " (raise sweep.max_points if intended)";
        throw ValidationError(os.str());
    }
    return spec;
}

} // namespace aggsim
