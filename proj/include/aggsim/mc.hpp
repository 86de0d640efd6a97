#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "aggsim/model.hpp"
#include "aggsim/particles.hpp"
#include "aggsim/record.hpp"

namespace aggsim {

//==============================================================================
// Monte Carlo engine for the two-stream kinetic model with internal state
//==============================================================================

struct McConfig {
    ModelParams params;
    Grid1D grid{50, 10.0};
    long N_bar = 2000;       // particles per cell in the uniform state
    double dt = 1e-3;
    double T_end = 0.0;      // raw-time horizon; ignored when T_lambda > 0
    double T_lambda = 0.0;   // horizon on the t/(lambda0 L^2) clock
    std::uint64_t seed = 1;
    double avg_window = 0.05;               // averaging window, t_lambda units
    std::vector<double> snapshots_tlambda;  // scheduled outputs
    int threads = 1;

    // Frozen constant-gradient mode (bypasses the S coupling): particles sense
    // the exact relative change exp(g v dt) - 1 of S = e^{g x} along their
    // path; deposit/chemo steps are skipped. Used for the Table-1 relation.
    std::optional<double> frozen_gradient;

    // Observer sampling cadence in steps (0 = never call on_sample).
    long sample_every = 0;

    double horizon() const {
        return T_lambda > 0.0 ? T_lambda * params.lambda0 * params.L * params.L : T_end;
    }
};

// Hook for diagnostics that need in-flight access (histogram accumulation,
// phase continuation). on_window fires at every averaging-window end with the
// window means; on_sample fires every sample_every steps with the live state.
struct McObserver {
    virtual void on_window(double t, double t_lambda, const ScalarField& rho_avg,
                           const ScalarField& S_avg) {
        (void)t; (void)t_lambda; (void)rho_avg; (void)S_avg;
    }
    virtual void on_sample(long long step, double t, const ParticleEnsemble& ens,
                           const ScalarField& S) {
        (void)step; (void)t; (void)ens; (void)S;
    }
    virtual ~McObserver() = default;
};

//------------------------------------------------------------------------------
// Granular operations (the unit-tested building blocks)
//------------------------------------------------------------------------------

// Exactly N_bar particles per cell, positions uniform within each cell,
// y = 0, v = +-1 with probability 1/2, all draws from the seeded
// counter-based generator. Deposit of the result is exactly 1 in every cell.
ParticleEnsemble init_uniform(const McConfig& cfg);

// r <- wrap(r + v dt) into [0, L).
void advect(ParticleEnsemble& ens, double dt, double L);

// rho_i = (particles in cell i) / N_bar.
ScalarField deposit_density(const ParticleEnsemble& ens, const Grid1D& grid,
                            long N_bar);

// Piecewise-linear interpolant anchored at cell centers: within cell i the
// slope is (S_i - S_{i-1})/dx left of the center and (S_{i+1} - S_i)/dx right
// of it; periodic neighbors.
double interpolate_S(const ScalarField& S, double x);

// Semi-implicit pathway update (closed form):
//   y^k = (y^{k-1} + (S^k_(l) - S^{k-1}_(l)) / S^{k-1}_(l)) / (1 + dt/tau)
// where S^k_(l) = interpolate_S(S_now, r_l). Stores S^k_(l) into ens.s_prev.
// Throws NonPositiveConcentration if any pathway value S^{k-1}_(l) <= 0.
void update_internal(ParticleEnsemble& ens, const ScalarField& S_now, double dt,
                     const ModelParams& p);

// Each particle flips v -> -v with probability (dt lambda0 / 2) Lambda_delta(y),
// one uniform per particle drawn from the (seed, particle, step) stream.
// Returns the number of flips. Throws ProbabilityOverflow when
// dt lambda0 (1+chi)/2 >= 1.
std::size_t tumble(ParticleEnsemble& ens, double dt, const ModelParams& p,
                   std::uint64_t seed, std::uint64_t step);

//------------------------------------------------------------------------------
// Full runs
//------------------------------------------------------------------------------

// Resumable engine: run_mc composes init + advance; acceptance diagnostics
// continue a run in memory after inspecting the stationary state.
class McEngine {
  public:
    explicit McEngine(const McConfig& cfg);

    // Advances through full averaging windows until the window end time
    // reaches t_target (raw time). Observer may be null.
    void advance_to(double t_target, McObserver* obs = nullptr);

    const ParticleEnsemble& ensemble() const { return ens_; }
    const ScalarField& field_S() const { return S_; }
    const RunRecord& record() const { return rec_; }
    RunRecord& record() { return rec_; }
    long long step_count() const { return step_; }
    double time() const { return step_ * cfg_.dt; }
    double t_lambda() const {
        return time() / (cfg_.params.lambda0 * cfg_.params.L * cfg_.params.L);
    }
    const McConfig& config() const { return cfg_; }

  private:
    void step_once();
    void finish_window();

    McConfig cfg_;
    ParticleEnsemble ens_;
    ScalarField S_;
    ScalarField rho_;
    RunRecord rec_;
    std::vector<int> counts_;
    std::vector<double> rho_sum_, S_sum_; // window accumulators
    std::vector<double> scratch_;         // reused S-update buffer
    std::vector<double> tab_s0_, tab_sr_, tab_sl_; // per-cell interp tables
    long long step_ = 0;
    long long window_steps_ = 0; // steps per averaging window
    long long in_window_ = 0;
    std::uint64_t seed_key_ = 0;
    std::size_t next_snapshot_ = 0;
    McObserver* obs_ = nullptr;
    double dsrel_plus_ = 0.0, dsrel_minus_ = 0.0; // frozen-gradient constants
};

// The full six-step cycle for ceil(horizon/dt) steps from the uniform initial
// state with S^0 = 1. Snapshots at the scheduled t_lambda values are trailing
// window averages; delta_rho_bar is filled when the run covers
// [T_lambda/2, T_lambda]. Throws FieldBlowup when max|S| or max|rho| > 1e6.
RunRecord run_mc(const McConfig& cfg, McObserver* obs = nullptr);

} // namespace aggsim
