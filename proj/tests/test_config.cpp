#include <doctest.h>

#include <string>

#include "aggsim/config.hpp"
#include "aggsim/errors.hpp"

using namespace aggsim;

namespace {

// Exception message helper: doctest's CHECK_THROWS_WITH wants exact strings;
// we only pin substrings so messages can stay informative.
template <typename E, typename F>
std::string message_of(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    return "";
}

bool mentions(const std::string& msg, const std::string& needle) {
    return msg.find(needle) != std::string::npos;
}

} // namespace

//==============================================================================
// INI parsing
//==============================================================================

TEST_CASE("parse_ini reads sections, comments and whitespace") {
    ConfigMap m = parse_ini("# banner\n"
                            "[model]\n"
                            "  lambda0 = 10   ; trailing comment\n"
                            "tau=0.2\n"
                            "\n"
                            "[grid]\n"
                            "I = 64 # inline\n");
    CHECK(m.entries.size() == 3);
    REQUIRE(m.find("model.lambda0") != nullptr);
    CHECK(m.find("model.lambda0")->value == "10");
    CHECK(m.find("model.lambda0")->line == 3);
    CHECK(m.find("model.tau")->value == "0.2");
    CHECK(m.find("grid.I")->value == "64");
    CHECK(m.has("grid.I"));
    CHECK(!m.has("grid.J"));
}

TEST_CASE("parse_ini rejects malformed input with line numbers") {
    const std::string dup = message_of<ParseError>(
        [] { parse_ini("[model]\ntau = 1\ntau = 2\n"); });
    CHECK(mentions(dup, "line 3"));
    CHECK(mentions(dup, "duplicate"));
    CHECK(mentions(dup, "first at line 2"));

    CHECK_THROWS_AS(parse_ini("tau = 1\n"), ParseError);          // no section
    CHECK_THROWS_AS(parse_ini("[model]\ntau\n"), ParseError);     // no '='
    CHECK_THROWS_AS(parse_ini("[model]\ntau =\n"), ParseError);   // empty value
    CHECK_THROWS_AS(parse_ini("[model\ntau = 1\n"), ParseError);  // bad header
    CHECK_THROWS_AS(parse_ini("[model]\nbad key = 1\n"), ParseError);
}

TEST_CASE("apply_override sets and replaces without reordering") {
    ConfigMap m = parse_ini("[model]\nlambda0 = 10\ntau = 0.2\n");
    apply_override(m, "model.tau=0.4");
    CHECK(m.entries.size() == 2);
    CHECK(m.entries[1].key == "model.tau"); // kept its slot
    CHECK(m.entries[1].value == "0.4");
    apply_override(m, "grid.I = 25");
    CHECK(m.entries.size() == 3);
    CHECK(m.find("grid.I")->value == "25");

    CHECK_THROWS_AS(apply_override(m, "no_equals"), ParseError);
    CHECK_THROWS_AS(apply_override(m, "nodot=1"), ParseError);
    CHECK_THROWS_AS(apply_override(m, "model.tau="), ParseError);
}

TEST_CASE("canonical text is sorted and hash ignores declaration order") {
    ConfigMap a = parse_ini("[model]\ntau = 0.2\nlambda0 = 10\n");
    ConfigMap b = parse_ini("# different layout\n[model]\nlambda0 = 10\n\n"
                            "tau = 0.2  ; comment\n");
    CHECK(canonical_text(a) == "model.lambda0 = 10\nmodel.tau = 0.2\n");
    CHECK(canonical_text(a) == canonical_text(b));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    for (char c : config_hash(a)) CHECK(mentions("0123456789abcdef", {c}));

    ConfigMap c = a;
    c.set("model.tau", "0.3");
    CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("typed getters parse or report the offending key") {
    ConfigMap m = parse_ini("[model]\nlambda0 = 1e1\n[grid]\nI = 50\n"
                            "[mc]\nN_bar = 12x\n");
    CHECK(config_double(m, "model.lambda0", 0.0) == 10.0);
    CHECK(config_double(m, "model.absent", 2.5) == 2.5);
    CHECK(config_int(m, "grid.I", 0) == 50);
    const std::string msg = message_of<ValidationError>(
        [&] { config_int(m, "mc.N_bar", 0); });
    CHECK(mentions(msg, "mc.N_bar"));
    CHECK(mentions(msg, "not an integer"));
}

//==============================================================================
// Parameter resolution
//==============================================================================

TEST_CASE("unknown keys are schema errors") {
    ConfigMap m = parse_ini("[model]\nlambda0 = 10\nbogus = 1\n");
    const std::string msg =
        message_of<ValidationError>([&] { params_from_config(m); });
    CHECK(mentions(msg, "unknown config keys"));
    CHECK(mentions(msg, "model.bogus"));
    CHECK(mentions(msg, "line 3"));
}

TEST_CASE("exclusive pairs are rejected") {
    CHECK_THROWS_AS(
        params_from_config(parse_ini("[model]\ntau = 0.1\nalpha = 1\n")),
        ValidationError);
    CHECK_THROWS_AS(
        params_from_config(
            parse_ini("[model]\ndelta = 0.1\nchi_over_delta = 5\n")),
        ValidationError);
    CHECK_THROWS_AS(
        build_experiment(
            parse_ini("[run]\nengine = mc\n[mc]\nT_lambda = 1\nT_end = 5\n")),
        ValidationError);
    CHECK_THROWS_AS(
        build_experiment(
            parse_ini("[run]\nengine = ks\n[ks]\nT_lambda = 1\nT_end = 5\n")),
        ValidationError);
}

TEST_CASE("alpha and chi_over_delta resolve to tau and delta") {
    ConfigMap m = parse_ini("[model]\nlambda0 = 10\nalpha = 2\n"
                            "chi_over_delta = 5\n"); // chi defaults to 0.5
    ModelParams p = params_from_config(m);
    CHECK(p.tau == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(p.alpha == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(p.delta == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(p.chi == 0.5);
}

TEST_CASE("invalid physics is rejected at build time") {
    CHECK_THROWS_AS(params_from_config(parse_ini("[model]\nchi = 1.5\n")),
                    ValidationError);
    CHECK_THROWS_AS(params_from_config(parse_ini("[model]\ntau = 0\n")),
                    ValidationError);
    CHECK_THROWS_AS(
        params_from_config(parse_ini("[model]\nchi_over_delta = -2\n")),
        ValidationError);
}

TEST_CASE("the dimensional section nondimensionalizes to the reference set") {
    // V0 = 1, a = 1, D_S = 1 make L0 = 1 and t0 = 1/a = 1: the scaled
    // parameters coincide with the kinetic defaults.
    ConfigMap m = parse_ini("[dimensional]\nV0 = 1\nlambda0 = 10\ntau = 0.1\n"
                            "D_S = 1\na = 1\nL = 10\n");
    ModelParams p = params_from_config(m);
    CHECK(p.lambda0 == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(p.tau == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(p.D_S == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.L == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(p.sigma == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.sigma_S == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.chi == 0.5);
    CHECK(p.delta == 0.1);

    ConfigMap mixed = parse_ini("[model]\nlambda0 = 10\n[dimensional]\nV0 = 1\n"
                                "lambda0 = 10\ntau = 0.1\nD_S = 1\na = 1\n"
                                "L = 10\n");
    const std::string msg =
        message_of<ValidationError>([&] { params_from_config(mixed); });
    CHECK(mentions(msg, "conflicts"));

    CHECK_THROWS_AS(params_from_config(parse_ini("[dimensional]\nV0 = 1\n")),
                    ValidationError); // missing required keys
}

//==============================================================================
// Experiments
//==============================================================================

TEST_CASE("engine resolution: config, subcommand, and their agreement") {
    CHECK_THROWS_AS(build_experiment(parse_ini("[model]\nlambda0 = 10\n")),
                    ValidationError); // no engine anywhere
    Experiment ex =
        build_experiment(parse_ini("[model]\nlambda0 = 10\n"), Engine::ks);
    CHECK(ex.engine == Engine::ks);
    Experiment ex2 = build_experiment(parse_ini("[run]\nengine = asymptotic\n"));
    CHECK(ex2.engine == Engine::asymptotic);
    const std::string msg = message_of<ValidationError>([] {
        build_experiment(parse_ini("[run]\nengine = ks\n"), Engine::mc);
    });
    CHECK(mentions(msg, "ks"));
    CHECK(mentions(msg, "mc"));
}

TEST_CASE("default experiment matches the documented reference setup") {
    Experiment ex = build_experiment(parse_ini("[run]\nengine = mc\n"));
    CHECK(ex.seed == 1);
    CHECK(ex.params.lambda0 == 10.0);
    CHECK(ex.mc.grid.I == 50);
    CHECK(ex.mc.N_bar == 28800);
    CHECK(ex.mc.dt == 1e-3);
    CHECK(ex.mc.T_lambda == 10.0);
    CHECK(ex.mc.T_end == 0.0);
    CHECK(ex.mc.avg_window == 0.05);
    CHECK(ex.mc.threads == 1);
    CHECK(!ex.mc.frozen_gradient.has_value());
    CHECK(ex.ks.T_end == 10.0);
    CHECK(ex.ks.perturbation.amplitude == 1e-2);
    CHECK(ex.ks.perturbation.mode == 1);
    CHECK(ex.asym.m_axis.K == 200);
    CHECK(ex.asym.m_axis.Y == 0.0);
    CHECK(!ex.write_phase);
    CHECK(ex.hash.size() == 16);
    CHECK(mentions(ex.canonical, "run.engine = mc"));
}

TEST_CASE("the stiff corner switches the MC resolution defaults") {
    Experiment hot = build_experiment(parse_ini(
        "[run]\nengine = mc\n[model]\nlambda0 = 500\ndelta = 0.01\n"));
    CHECK(hot.mc.grid.I == 100);
    CHECK(hot.mc.N_bar == 7400);
    CHECK(hot.mc.dt == 5e-5);

    Experiment mid = build_experiment(parse_ini(
        "[run]\nengine = mc\n[model]\nlambda0 = 150\ndelta = 0.01\n"));
    CHECK(mid.mc.grid.I == 50); // corner needs lambda0 >= 500
    CHECK(mid.mc.dt == 2e-4);

    // the I = 100 default is an MC concern; PDE engines keep 50
    Experiment pde = build_experiment(parse_ini(
        "[run]\nengine = ks\n[model]\nlambda0 = 500\ndelta = 0.01\n"));
    CHECK(pde.ks.grid.I == 50);
}

TEST_CASE("T_lambda keys convert to diffusion-time horizons for PDE engines") {
    Experiment ex = build_experiment(
        parse_ini("[run]\nengine = ks\n[ks]\nT_lambda = 0.3\n"));
    CHECK(ex.ks.T_end == doctest::Approx(30.0).epsilon(1e-15)); // * L^2
    Experiment ea = build_experiment(
        parse_ini("[run]\nengine = asymptotic\n[asymptotic]\nT_lambda = 0.2\n"));
    CHECK(ea.asym.T_end == doctest::Approx(20.0).epsilon(1e-15));
}

TEST_CASE("seed flows into the engine configs") {
    Experiment ex = build_experiment(
        parse_ini("[run]\nengine = mc\nseed = 7\n[ks]\nperturb_mode = 0\n"));
    CHECK(ex.seed == 7);
    CHECK(ex.mc.seed == 7);
    CHECK(ex.ks.perturbation.seed == 7);
    CHECK_THROWS_AS(
        build_experiment(parse_ini("[run]\nengine = mc\nseed = -3\n")),
        ValidationError);
}

TEST_CASE("run-length diagnostics are MC-only and validated") {
    Experiment ex = build_experiment(parse_ini(
        "[run]\nengine = mc\n[mc]\nrunlength_rs = 0, 1.5, 3\n"));
    CHECK(ex.runlength_rs == std::vector<double>{0.0, 1.5, 3.0});
    CHECK(ex.runlength_burnin_tlambda == 1.0);
    CHECK(ex.runlength_sample_every == 200);
    CHECK_THROWS_AS(build_experiment(parse_ini(
                        "[run]\nengine = ks\n[mc]\nrunlength_rs = 1\n")),
                    ValidationError);
    CHECK_THROWS_AS(
        build_experiment(parse_ini(
            "[run]\nengine = mc\n[mc]\nrunlength_sample_every = 0\n")),
        ValidationError);
}

TEST_CASE("experiment configs reject [sweep] sections") {
    CHECK_THROWS_AS(
        build_experiment(parse_ini(
            "[run]\nengine = mc\n[sweep]\naxis.model.alpha = 1, 2\n")),
        ValidationError);
}

//==============================================================================
// Sweeps
//==============================================================================

TEST_CASE("sweep grids nest in declaration order, last axis fastest") {
    ConfigMap m = parse_ini("[run]\nengine = ks\n"
                            "[sweep]\n"
                            "axis.model.alpha = 1, 2\n"
                            "axis.model.chi_over_delta = 2, 4, 6\n");
    SweepSpec spec = build_sweep(m);
    REQUIRE(spec.axes.size() == 2);
    CHECK(spec.axes[0].key == "model.alpha");
    CHECK(spec.axes[1].key == "model.chi_over_delta");
    CHECK(spec.points() == 6);
    CHECK(!spec.base.has("sweep.max_points"));
    CHECK(spec.base.has("run.engine"));

    ConfigMap p0 = spec.point(0);
    CHECK(p0.find("model.alpha")->value == "1");
    CHECK(p0.find("model.chi_over_delta")->value == "2");
    ConfigMap p1 = spec.point(1);
    CHECK(p1.find("model.alpha")->value == "1");
    CHECK(p1.find("model.chi_over_delta")->value == "4"); // fastest axis moved
    ConfigMap p5 = spec.point(5);
    CHECK(p5.find("model.alpha")->value == "2");
    CHECK(p5.find("model.chi_over_delta")->value == "6");
    // every point still builds a valid experiment
    Experiment ex = build_experiment(p5);
    CHECK(ex.params.alpha == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("sweep validation: caps, engine axis, unknown targets") {
    const std::string over = message_of<ValidationError>([] {
        build_sweep(parse_ini("[sweep]\nmax_points = 4\n"
                              "axis.model.alpha = 1, 2, 3\n"
                              "axis.model.chi = 0.3, 0.5\n"));
    });
    CHECK(mentions(over, "above the cap"));
    CHECK_THROWS_AS(
        build_sweep(parse_ini("[sweep]\naxis.run.engine = mc, ks\n")),
        ValidationError);
    CHECK_THROWS_AS(
        build_sweep(parse_ini("[sweep]\naxis.model.bogus = 1\n")),
        ValidationError);
    CHECK_THROWS_AS(build_sweep(parse_ini("[model]\nlambda0 = 10\n")),
                    ValidationError); // no axes
    CHECK_THROWS_AS(build_sweep(parse_ini("[sweep]\naxis.model.alpha = ,\n")),
                    ValidationError); // empty value list
}
