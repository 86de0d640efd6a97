#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

#include "aggsim/diagnostics.hpp"
#include "aggsim/model.hpp"

namespace aggsim {

// One scheduled output: for the MC engine rho/S are the trailing
// 0.05-t_lambda window averages ending at the reported time (the t = 0 entry
// is the instantaneous initial state); PDE engines store instantaneous fields.
struct Snapshot {
    double t = 0.0;
    double t_lambda = 0.0;
    ScalarField rho;
    ScalarField S;
};

// Common result shape of all three engines.
struct RunRecord {
    ModelParams params;
    std::vector<Snapshot> snapshots;

    // One sample per averaging window (window end time, both clocks).
    DeviationSeries deviation;
    std::vector<double> window_t;        // raw engine time
    std::vector<double> window_drho;     // Delta rho of the window-averaged profile

    // (2/T_lambda) integral over [T_lambda/2, T_lambda]; NaN when the run was
    // too short for coverage.
    double delta_rho_bar = std::nan("");

    // Stationarity bookkeeping (PDE engines): |Delta rho(t) - Delta rho(t-1)| < 1e-4.
    bool stationary = false;
    double stationary_time = std::nan("");
    double stationary_drho = std::nan("");

    double t_end = 0.0;
    double t_lambda_end = 0.0;
    long long steps = 0;

    // Final profiles: instantaneous for PDE engines, last-window averages for MC.
    ScalarField final_rho;
    ScalarField final_S;
};

} // namespace aggsim
