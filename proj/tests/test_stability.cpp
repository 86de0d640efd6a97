#include <doctest.h>

#include <cmath>
#include <random>

#include "aggsim/model.hpp"
#include "aggsim/stability.hpp"

using namespace aggsim;

namespace {
constexpr double kPi = 3.141592653589793;
}

//==============================================================================
// Dispersion relation
//==============================================================================

TEST_CASE("growth rate reduces to pure diffusion when chi = 0") {
    for (double k : {0.1, 0.6283185307179586, 2.0, 7.5}) {
        DispersionQuery q{k, 1.0, 0.0, 0.1, 1.0};
        CHECK(growth_rate(q) == -k * k);
    }
}

TEST_CASE("growth rate vanishes exactly at the critical stiffness") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double k = 0.2 + 2.8 * U(gen);
        const double alpha = 0.05 + 20.0 * U(gen);
        const double D_S = 0.2 + 3.0 * U(gen);
        const double crit = critical_stiffness(k, alpha, D_S);
        const double delta = 0.05 + 0.2 * U(gen);
        DispersionQuery q{k, alpha, crit * delta, delta, D_S};
        CHECK(std::abs(growth_rate(q)) < 1e-12);
        // epsilon above / below the threshold flips the sign
        q.chi = crit * delta * 1.001;
        CHECK(growth_rate(q) > 0.0);
        q.chi = crit * delta * 0.999;
        CHECK(growth_rate(q) < 0.0);
    }
}

TEST_CASE("critical stiffness frozen values for the n = 1 mode on L = 10") {
    const double k1 = 2.0 * kPi / 10.0;
    CHECK(k1 == doctest::Approx(0.6283185307179586).epsilon(1e-15));
    // alpha = 1, D_S = 1: 2 (1 + k^2)
    CHECK(critical_stiffness(k1, 1.0, 1.0) ==
          doctest::Approx(2.789568352087149).epsilon(1e-14));
    // instantaneous-adaptation limit alpha -> inf: 1 + k^2
    CHECK(critical_stiffness(k1, 1e15, 1.0) ==
          doctest::Approx(1.3947841760435744).epsilon(1e-12));
    // D_S = 0 removes the k dependence: (1+alpha)/alpha exactly
    CHECK(critical_stiffness(5.0, 4.0, 0.0) == 1.25);
    CHECK(critical_stiffness(0.3, 4.0, 0.0) == 1.25);
}

TEST_CASE("growth-rate frozen value: stiff limit, chi/delta = 5, n = 1") {
    const double k1 = 2.0 * kPi / 10.0;
    DispersionQuery q{k1, 1e15, 0.5, 0.1, 1.0};
    CHECK(growth_rate(q) ==
          doctest::Approx(1.0204318223319364).epsilon(1e-12));
}

TEST_CASE("growth rate is monotone in stiffness; threshold drops with alpha") {
    const double k1 = 2.0 * kPi / 10.0;
    double prev = -1e300;
    for (double stiff = 0.5; stiff < 8.0; stiff += 0.25) {
        DispersionQuery q{k1, 2.0, stiff * 0.1, 0.1, 1.0};
        const double mu = growth_rate(q);
        CHECK(mu > prev);
        prev = mu;
    }
    double prev_crit = 1e300;
    for (double alpha : {0.1, 0.5, 1.0, 5.0, 50.0, 1e4}) {
        const double crit = critical_stiffness(k1, alpha, 1.0);
        CHECK(crit < prev_crit);
        prev_crit = crit;
    }
}

//==============================================================================
// Mode scan
//==============================================================================

TEST_CASE("most unstable mode: alpha = 100, chi/delta = 5, L = 10") {
    ModelParams p = ModelParams::make(10.0, 10.0, 0.1, 0.5); // alpha = 100
    UnstableMode m = most_unstable_mode(p, 10.0);
    CHECK(!m.all_stable);
    CHECK(m.n == 2);
    CHECK(m.k == doctest::Approx(2.0 * kPi * 2 / 10.0).epsilon(1e-15));
    CHECK(m.mu == doctest::Approx(1.4519195495922799).epsilon(1e-13));

    // independent scan with the raw formula
    double best_mu = 0.0;
    int best_n = 0;
    for (int n = 1; n <= 50; ++n) {
        const double k = 2.0 * kPi * n / 10.0;
        const double k2 = k * k;
        const double mu =
            -k2 * (1.0 - p.alpha * (p.chi / p.delta) /
                             ((1.0 + p.alpha) * (1.0 + p.D_S * k2)));
        if (mu > best_mu) {
            best_mu = mu;
            best_n = n;
        }
    }
    CHECK(best_n == m.n);
    CHECK(best_mu == doctest::Approx(m.mu).epsilon(1e-15));
}

TEST_CASE("most unstable mode reports all-stable at chi/delta = 1") {
    ModelParams p = ModelParams::make(10.0, 10.0, 0.1, 0.1); // stiffness 1
    UnstableMode m = most_unstable_mode(p, 10.0);
    CHECK(m.all_stable);
    CHECK(m.n == 0);
    CHECK(m.mu == 0.0);
}

TEST_CASE("large domain approaches the continuum growth-rate maximum") {
    // max_k mu = (sqrt(beta) - 1)^2 at k^2 = sqrt(beta) - 1 with
    // beta = alpha (chi/delta) / (1+alpha); L = 1000 resolves the argmax
    // to 1e-4 relative.
    ModelParams p = ModelParams::make(10.0, 10.0, 0.1, 0.5);
    const double beta = p.alpha / (1.0 + p.alpha) * (p.chi / p.delta);
    const double mu_star = (std::sqrt(beta) - 1.0) * (std::sqrt(beta) - 1.0);
    UnstableMode m = most_unstable_mode(p, 1000.0, 400);
    CHECK(!m.all_stable);
    CHECK(m.mu == doctest::Approx(mu_star).epsilon(1e-3));
    CHECK(m.k * m.k == doctest::Approx(std::sqrt(beta) - 1.0).epsilon(0.02));
}

//==============================================================================
// Classification
//==============================================================================

TEST_CASE("classification thresholds and boundary ownership") {
    CHECK(classify(0.005) == Stability::stable);
    CHECK(classify(0.05) == Stability::intermediate);
    CHECK(classify(0.5) == Stability::unstable);
    // boundaries go to the higher class
    CHECK(classify(0.01) == Stability::intermediate);
    CHECK(classify(0.1) == Stability::unstable);
    CHECK(to_string(Stability::stable) == "stable");
    CHECK(to_string(Stability::intermediate) == "intermediate");
    CHECK(to_string(Stability::unstable) == "unstable");
}
