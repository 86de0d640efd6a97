#include "pde_recorder.hpp"

#include <algorithm>
#include <cmath>

#include "aggsim/diagnostics.hpp"
#include "aggsim/errors.hpp"

namespace aggsim::detail {

namespace {
constexpr double kTimeTol = 1e-9;
}

PdeRecorder::PdeRecorder(const ModelParams& params, const Grid1D& grid,
                         const ScalarField& rho0, const ScalarField& S0,
                         double avg_window, std::vector<double> snapshots_tlambda,
                         double T_end, bool stop_at_stationary)
    : L2_(params.L * params.L),
      T_end_(T_end),
      stop_(stop_at_stationary) {
    if (!(avg_window > 0))
        throw ValidationError("avg_window must be positive");
    window_ = avg_window * L2_;
    window_end_ = window_;
    rec_.params = params;
    acc_.assign(grid.I, 0.0);
    prev_drho_ = peak_density(rho0);

    std::sort(snapshots_tlambda.begin(), snapshots_tlambda.end());
    snaps_.reserve(snapshots_tlambda.size());
    for (double tl : snapshots_tlambda) snaps_.push_back(tl * L2_);
    while (next_snap_ < snaps_.size() && snaps_[next_snap_] <= kTimeTol) {
        rec_.snapshots.push_back({0.0, 0.0, rho0, S0});
        ++next_snap_;
    }
}

double PdeRecorder::next_boundary(double t) const {
    double b = T_end_;
    b = std::min(b, window_end_);
    b = std::min(b, next_unit_);
    if (next_snap_ < snaps_.size()) b = std::min(b, snaps_[next_snap_]);
    // Boundaries already processed sit at or below t; never step backwards.
    return b > t ? b : T_end_;
}

void PdeRecorder::flush_window(double t_end) {
    const double length = t_end - window_start_;
    if (length <= kTimeTol) return;
    double dev = 0.0, mx = acc_[0] / length;
    for (double& a_int : acc_) {
        const double a = a_int / length;
        const double d = std::abs(a - 1.0);
        dev = d > dev ? d : dev;
        mx = a > mx ? a : mx;
        a_int = 0.0;
    }
    rec_.deviation.push(t_end / L2_, dev);
    rec_.window_t.push_back(t_end);
    rec_.window_drho.push_back(mx - 1.0);
    window_start_ = t_end;
}

bool PdeRecorder::after_step(double t, double dt, const ScalarField& rho,
                             const ScalarField& S) {
    for (int i = 0; i < rho.grid.I; ++i) acc_[i] += rho[i] * dt;

    if (t >= window_end_ - kTimeTol) {
        flush_window(t);
        window_end_ += window_;
    }
    if (t >= next_unit_ - kTimeTol) {
        const double drho = peak_density(rho);
        const bool flat = std::abs(drho - prev_drho_) < 1e-4;
        if (flat && !latched_) {
            rec_.stationary = true;
            rec_.stationary_time = t;
            rec_.stationary_drho = drho;
            latched_ = true;
        }
        prev_drho_ = drho;
        next_unit_ += 1.0;
        if (flat && stop_) return false;
    }
    while (next_snap_ < snaps_.size() && t >= snaps_[next_snap_] - kTimeTol) {
        rec_.snapshots.push_back({t, t / L2_, rho, S});
        ++next_snap_;
    }
    return true;
}

RunRecord PdeRecorder::take(double t, const ScalarField& rho,
                            const ScalarField& S, long long steps) {
    if (t > window_start_ + kTimeTol) flush_window(t);
    rec_.final_rho = rho;
    rec_.final_S = S;
    rec_.t_end = t;
    rec_.t_lambda_end = t / L2_;
    rec_.steps = steps;
    try {
        rec_.delta_rho_bar = time_avg_deviation(rec_.deviation, rec_.t_lambda_end);
    } catch (const InsufficientCoverage&) {
        // runs cut short (stationary stop) keep delta_rho_bar = NaN
    }
    return std::move(rec_);
}

} // namespace aggsim::detail
