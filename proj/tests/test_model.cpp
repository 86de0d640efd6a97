#include <doctest.h>

#include <cmath>
#include <random>

#include "aggsim/errors.hpp"
#include "aggsim/model.hpp"

using namespace aggsim;

//==============================================================================
// Tumbling modulation Lambda_delta(y)
//==============================================================================

TEST_CASE("modulation at y = 0 is exactly 1") {
    CHECK(modulation(0.0, 0.1, 0.5) == 1.0);
    CHECK(modulation(0.0, 0.01, 0.9) == 1.0);
}

TEST_CASE("modulation approaches the bounds 1 -+ chi at large |y|") {
    const double chi = 0.5, delta = 0.1;
    CHECK(modulation(1e12, delta, chi) == doctest::Approx(1.0 - chi).epsilon(1e-12));
    CHECK(modulation(-1e12, delta, chi) == doctest::Approx(1.0 + chi).epsilon(1e-12));
    // Strictly inside the bounds while 1/z^2 is still above rounding; at
    // |y| ~ 1e12 the ratio z/sqrt(1+z^2) saturates to 1 in double precision.
    const double lo = modulation(1e5, delta, chi);
    const double up = modulation(-1e5, delta, chi);
    CHECK(lo == doctest::Approx(1.0 - chi).epsilon(1e-9));
    CHECK(up == doctest::Approx(1.0 + chi).epsilon(1e-9));
    CHECK(lo > 1.0 - chi);
    CHECK(up < 1.0 + chi);
}

TEST_CASE("modulation frozen value at y = delta") {
    // independent high-precision evaluation of 1 - 0.5/sqrt(2)
    CHECK(modulation(0.1, 0.1, 0.5) ==
          doctest::Approx(0.6464466094067263).epsilon(1e-15));
}

TEST_CASE("modulation odd-response symmetry: Lambda(y) + Lambda(-y) = 2") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int t = 0; t < 200; ++t) {
        const double y = u(gen);
        const double s = modulation(y, 0.1, 0.5) + modulation(-y, 0.1, 0.5);
        CHECK(s == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("modulation is monotonically decreasing in y") {
    double prev = modulation(-10.0, 0.1, 0.5);
    for (double y = -9.9; y <= 10.0; y += 0.1) {
        const double cur = modulation(y, 0.1, 0.5);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("modulation slope at y = 0 equals -chi/delta") {
    const double chi = 0.5, delta = 0.1;
    const double h = 1e-7;
    const double slope =
        (modulation(h, delta, chi) - modulation(-h, delta, chi)) / (2.0 * h);
    CHECK(slope == doctest::Approx(-chi / delta).epsilon(1e-6));
}

//==============================================================================
// Logarithmic sensing
//==============================================================================

TEST_CASE("log_sensing of the uniform fields") {
    Grid1D g(8, 10.0);
    ScalarField S(g, 1.0);
    ScalarField M = log_sensing(S);
    for (int i = 0; i < g.I; ++i) CHECK(M[i] == 0.0);

    ScalarField Se(g, std::exp(1.0));
    ScalarField Me = log_sensing(Se);
    for (int i = 0; i < g.I; ++i)
        CHECK(Me[i] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("log_sensing against the scalar log oracle") {
    Grid1D g(3, 3.0);
    ScalarField S(g);
    S[0] = 1.0;
    S[1] = 2.0;
    S[2] = 4.0;
    ScalarField M = log_sensing(S);
    CHECK(M[0] == 0.0);
    CHECK(M[1] == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    CHECK(M[2] == doctest::Approx(1.3862943611198906).epsilon(1e-15));
}

TEST_CASE("log_sensing rejects non-positive concentrations") {
    Grid1D g(4, 4.0);
    ScalarField S(g, 1.0);
    S[2] = 0.0;
    CHECK_THROWS_AS(log_sensing(S), NonPositiveConcentration);
    S[2] = -0.5;
    CHECK_THROWS_AS(log_sensing(S), NonPositiveConcentration);
}

//==============================================================================
// Nondimensionalization
//==============================================================================

TEST_CASE("nondimensionalize with unit inputs") {
    DimensionalParams d{};
    d.V0 = 1.0;
    d.lambda0_dim = 10.0;
    d.tau_dim = 1.0;
    d.D_S_dim = 1.0;
    d.a = 1.0;
    d.b = 1.0;
    d.rho0 = 1.0;
    d.L_dim = 10.0;
    d.t0 = 1.0; // L0/V0 = 1
    ModelParams p = nondimensionalize(d);
    // L0 = sqrt(1/1) = 1
    CHECK(p.lambda0 == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(p.tau == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.sigma == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.sigma_S == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.D_S == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.L == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("nondimensionalize diffusion-length scaling") {
    DimensionalParams d{};
    d.V0 = 1.0;
    d.lambda0_dim = 1.0;
    d.tau_dim = 1.0;
    d.D_S_dim = 4.0;
    d.a = 1.0;
    d.b = 1.0;
    d.rho0 = 1.0;
    d.L_dim = 20.0;
    d.t0 = 1.0;
    ModelParams p = nondimensionalize(d);
    // L0 = sqrt(4/1) = 2, so L_hat = 20/2 = 10 and D_S_hat = 4/(1*4) = 1
    CHECK(p.L == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(p.D_S == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("nondimensionalize run-length scale: epsilon = l0 / L0") {
    // L0 = 100 um diffusion length, run length l0 = V0/lambda0_dim = 20 um
    // => epsilon = 1/lambda0_hat = 0.2
    DimensionalParams d{};
    d.V0 = 20.0;         // um per second
    d.lambda0_dim = 1.0; // per second -> l0 = 20 um
    d.tau_dim = 1.0;
    d.D_S_dim = 1e4; // um^2/s with a = 1 -> L0 = 100 um
    d.a = 1.0;
    d.b = 1.0;
    d.rho0 = 1.0;
    d.L_dim = 1000.0;
    d.t0 = 5.0;
    ModelParams p = nondimensionalize(d);
    CHECK(p.epsilon == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("nondimensionalize round-trips through redimensionalize") {
    DimensionalParams d{};
    d.V0 = 3.5;
    d.lambda0_dim = 7.25;
    d.tau_dim = 0.43;
    d.D_S_dim = 2.75;
    d.a = 1.6;
    d.b = 1.0;
    d.rho0 = 1.0;
    d.L_dim = 42.0;
    d.t0 = 0.31;
    ModelParams p = nondimensionalize(d, 0.5, 0.1);
    DimensionalParams back = redimensionalize(p, d.V0, d.a);
    CHECK(back.lambda0_dim == doctest::Approx(d.lambda0_dim).epsilon(1e-12));
    CHECK(back.tau_dim == doctest::Approx(d.tau_dim).epsilon(1e-12));
    CHECK(back.D_S_dim == doctest::Approx(d.D_S_dim).epsilon(1e-12));
    CHECK(back.L_dim == doctest::Approx(d.L_dim).epsilon(1e-12));
    CHECK(back.t0 == doctest::Approx(d.t0).epsilon(1e-12));
}

TEST_CASE("nondimensionalize rejects non-positive inputs") {
    DimensionalParams d{};
    d.V0 = 1.0;
    d.lambda0_dim = 1.0;
    d.tau_dim = 1.0;
    d.D_S_dim = 1.0;
    d.a = 1.0;
    d.b = 1.0;
    d.rho0 = 1.0;
    d.L_dim = 1.0;
    d.t0 = 1.0;
    DimensionalParams bad = d;
    bad.a = 0.0;
    CHECK_THROWS_AS(nondimensionalize(bad), InvalidDimensional);
    bad = d;
    bad.V0 = -1.0;
    CHECK_THROWS_AS(nondimensionalize(bad), InvalidDimensional);
}

//==============================================================================
// Parameter validation
//==============================================================================

namespace {
bool mentions(const std::vector<std::string>& v, const std::string& what) {
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}
} // namespace

TEST_CASE("validate accepts the reference parameter set") {
    ModelParams p = ModelParams::make(10.0, 0.1, 0.1, 0.5);
    CHECK(validate(p).empty());
    CHECK(p.alpha == 10.0 * 0.1);
    CHECK(p.epsilon == 1.0 / 10.0);
    CHECK(p.tau_tilde == p.epsilon * p.tau);
}

TEST_CASE("validate flags out-of-range chi") {
    ModelParams p = ModelParams::make(10.0, 0.1, 0.1, 1.2);
    CHECK(mentions(validate(p), "chi"));
    p = ModelParams::make(10.0, 0.1, 0.1, -0.1);
    CHECK(mentions(validate(p), "chi"));
}

TEST_CASE("validate accepts chi = 0 (chemotaxis off, the control case)") {
    ModelParams p = ModelParams::make(10.0, 0.1, 0.1, 0.0);
    CHECK(validate(p).empty());
    CHECK(modulation(3.7, p) == 1.0); // Lambda is identically 1
}

TEST_CASE("validate flags non-positive tau") {
    ModelParams p = ModelParams::make(10.0, 0.1, 0.1, 0.5);
    p.tau = 0.0;
    CHECK(mentions(validate(p), "tau"));
}

TEST_CASE("validate flags inconsistent derived quantities") {
    ModelParams p = ModelParams::make(10.0, 0.1, 0.1, 0.5);
    p.alpha = 2.0; // no longer lambda0 * tau
    CHECK(mentions(validate(p), "alpha"));
    p = ModelParams::make(10.0, 0.1, 0.1, 0.5);
    p.epsilon = 0.2;
    CHECK(mentions(validate(p), "epsilon"));
}

TEST_CASE("validate consistency check survives any lambda0*tau rounding") {
    // Exactness must mean "equal to the correctly rounded product", including
    // values whose product is inexact in binary floating point.
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.01, 100.0);
    for (int t = 0; t < 100; ++t) {
        ModelParams p = ModelParams::make(u(gen), u(gen), 0.1, 0.5);
        CHECK(validate(p).empty());
    }
}

TEST_CASE("require_valid throws with every violation listed") {
    ModelParams p = ModelParams::make(10.0, 0.1, 0.1, 0.5);
    p.delta = -1.0;
    p.chi = 2.0;
    try {
        require_valid(p);
        CHECK(false);
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("delta") != std::string::npos);
        CHECK(msg.find("chi") != std::string::npos);
    }
}

//==============================================================================
// Grid conventions
//==============================================================================

TEST_CASE("grid cell centers and cell lookup agree") {
    Grid1D g(50, 10.0);
    CHECK(g.dx == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(g.I * g.dx == doctest::Approx(g.L).epsilon(1e-12));
    for (int i = 0; i < g.I; ++i) {
        CHECK(g.center(i) == doctest::Approx((i + 0.5) * 0.2).epsilon(1e-15));
        CHECK(g.cell_of(g.center(i)) == i);
    }
    // the wrap guard: a position one ulp below L stays in the last cell
    CHECK(g.cell_of(std::nextafter(10.0, 0.0)) == g.I - 1);
    CHECK(g.cell_of(0.0) == 0);
}
