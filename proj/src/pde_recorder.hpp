#pragma once
#include <vector>

#include "aggsim/model.hpp"
#include "aggsim/record.hpp"

namespace aggsim::detail {

//==============================================================================
// Shared diffusion-clock bookkeeping for the two PDE engines: time-weighted
// window averages of rho, stationarity checks at unit diffusion times, and
// instantaneous snapshots at the scheduled t_lambda values.
//==============================================================================

class PdeRecorder {
  public:
    PdeRecorder(const ModelParams& params, const Grid1D& grid,
                const ScalarField& rho0, const ScalarField& S0,
                double avg_window, std::vector<double> snapshots_tlambda,
                double T_end, bool stop_at_stationary);

    // Largest time the next step may reach without skipping a boundary
    // (window end, unit stationarity sample, snapshot, or T_end).
    double next_boundary(double t) const;

    // Call once per accepted step with the new time and the dt just taken.
    // Returns false when integration should stop (stationary + stop flag).
    bool after_step(double t, double dt, const ScalarField& rho,
                    const ScalarField& S);

    // Flushes any partial window and assembles the final record.
    RunRecord take(double t, const ScalarField& rho, const ScalarField& S,
                   long long steps);

  private:
    void flush_window(double t_end);

    double L2_ = 100.0;   // t_lambda = t_diffusion / L^2
    double window_ = 5.0; // diffusion-time window length
    double T_end_ = 10.0;
    bool stop_ = false;
    std::vector<double> snaps_; // snapshot schedule in diffusion time
    RunRecord rec_;
    std::vector<double> acc_; // time-weighted rho integral, current window
    double window_start_ = 0.0;
    double window_end_ = 5.0;
    double next_unit_ = 1.0;
    double prev_drho_ = 0.0;
    std::size_t next_snap_ = 0;
    bool latched_ = false; // first stationarity trigger already recorded
};

} // namespace aggsim::detail
