#pragma once
#include <cstdint>
#include <vector>

#include "aggsim/ks.hpp"
#include "aggsim/model.hpp"
#include "aggsim/record.hpp"

namespace aggsim {

//==============================================================================
// Large-adaptation-time asymptotic solver (diffusion time scale)
//   d_t p - d_x( d_x p / Lambda_delta(M(S) - m) ) + d_m( (M(S)-m)/tau_tilde p ) = 0
//==============================================================================

struct MAxis {
    int K = 200;      // cells over m in [-Y, Y]
    double Y = 0.0;   // half-width; 0 = auto max(4 max|M(S0)|, 1)
    double dm = 0.0;  // set on initialization
    // Integer-offset form: the axis is exactly symmetric (center(K-1-k) ==
    // -center(k) bitwise) and an odd K puts its middle cell at exactly 0, so
    // the relaxed state under a uniform field carries no rounding-level drift.
    double center(int k) const { return (2 * k + 1 - K) * (0.5 * dm); }
};

struct PhaseDensity {
    Grid1D grid;  // x axis
    MAxis m;
    std::vector<double> values; // row-major p[i*K + k], all >= 0
    double t = 0.0;

    double& at(int i, int k) { return values[static_cast<std::size_t>(i) * m.K + k]; }
    double at(int i, int k) const { return values[static_cast<std::size_t>(i) * m.K + k]; }
    double mass() const; // sum p dx dm
};

struct AsymptoticConfig {
    ModelParams params; // tau_tilde is the relaxation scale used
    Grid1D grid{50, 10.0};
    MAxis m_axis;
    double dt_max = 0.0; // 0 = adaptive CFL bound only
    double T_end = 10.0; // diffusion-time horizon
    Perturbation perturbation;
    std::vector<double> snapshots_tlambda;
    double avg_window = 0.05;
    bool stop_at_stationary = false;
};

// One explicit finite-volume step against the field S (held fixed during the
// step): centered x-diffusion with face coefficients 1/Lambda_{i+-1/2,k},
// Lambda evaluated at M((S_i + S_{i+1})/2) - m_k, and upwind m-advection with
// fluxes psi_{i,k-1/2} = (M_i - m_{k-1})^+ p_{i,k-1} - (M_i - m_k)^- p_{i,k};
// m-boundary fluxes are zero. Returns dt taken. The adaptive step is the
// positivity-preserving harmonic bound
//   dt = 0.9 / ( 2/(dx^2 Lambda_min) + max|M_i - m_k| / (tau_tilde dm) ),
// which keeps every cell's outflow coefficient below 0.9 (a bare min() of the
// two one-operator bounds can drive corner cells negative when both bind at
// once); dt_max / dt_cap clip it further when positive.
double step_asymptotic(PhaseDensity& p, const ScalarField& S,
                       const AsymptoticConfig& cfg, double dt_cap = 0.0);

// rho_i = sum_k p_{i,k} dm.
ScalarField marginal_density(const PhaseDensity& p);

// Integrates from rho = 1 + perturbation with each column's mass placed in the
// m-cell containing M(S) = ln S; S refreshed quasi-statically every step.
// Aborts with DomainTooSmall when the m-boundary cells accumulate more than
// 1e-8 of the total mass. If p_final is non-null the final phase density is
// copied there.
RunRecord run_asymptotic(const AsymptoticConfig& cfg, PhaseDensity* p_final = nullptr);

} // namespace aggsim
