#pragma once
#include <cstdint>
#include <vector>

#include "aggsim/model.hpp"
#include "aggsim/record.hpp"

namespace aggsim {

//==============================================================================
// Keller-Segel-limit solver (diffusion time scale)
//   d_t rho = d_xx rho - d_x(c * d_x ln(S) * rho),  -D_S d_xx S + S = rho
//==============================================================================

enum class KsRegime { fast, very_fast, moderate };

// Drift prefactor multiplying d_x M:
//   fast      -> alpha chi / (delta (1+alpha))
//   very_fast -> 0
//   moderate  -> chi / delta
double chemotactic_coefficient(const ModelParams& p, KsRegime regime);

struct Perturbation {
    double amplitude = 1e-2;
    int mode = 1;            // rho0 = 1 + A cos(2 pi mode x / L); mode 0 = seeded noise
    std::uint64_t seed = 1;  // used when mode == 0
};

struct KsConfig {
    ModelParams params;
    Grid1D grid{50, 10.0};
    KsRegime regime = KsRegime::fast;
    double dt_max = 0.0;    // 0 = adaptive bound only
    double T_end = 10.0;    // diffusion-time horizon
    Perturbation perturbation;
    std::vector<double> snapshots_tlambda;
    double avg_window = 0.05;      // t_lambda units (t_lambda = t_diff / L^2)
    bool stop_at_stationary = false;
};

struct KsState {
    ScalarField rho;
    ScalarField S;
    double t = 0.0;
};

// rho = 1 + perturbation, shared by both PDE engines: mode >= 1 is a cosine,
// mode 0 is seeded uniform noise re-centered to mean 1. Amplitude must lie in
// [0, 1) so the profile stays positive.
ScalarField initial_density(const Grid1D& grid, const Perturbation& pert);

// One explicit step: centered diffusion + upwind chemotactic flux at faces,
//   F_{i+1/2} = c (d_x M)_{i+1/2} rho_up,  (d_x M)_{i+1/2} = (ln S_{i+1} - ln S_i)/dx,
// then S is recomputed quasi-statically. dt is the positivity-preserving
// combined bound 0.9 / (2/dx^2 + max_i out_i / dx) with out_i the summed
// advective outflow speed of cell i; it satisfies the one-term bounds
// 0.9 dx^2/2 and 0.9 dx/max|c d_x M| and keeps every cell's total outflow
// coefficient below 0.9. Clipped to dt_max / dt_cap when those are positive.
// Returns the dt actually taken. Throws NegativeDensity below -1e-12.
double step_ks(KsState& state, const KsConfig& cfg, double dt_cap = 0.0);

// Integrates rho = 1 + perturbation to T_end, recording window-averaged
// deviation samples and the stationary Delta rho when
// |Delta rho(t) - Delta rho(t-1)| < 1e-4 triggers.
RunRecord run_ks(const KsConfig& cfg);

} // namespace aggsim
