#pragma once
#include <utility>
#include <vector>

#include "aggsim/model.hpp"
#include "aggsim/particles.hpp"

namespace aggsim {

//==============================================================================
// Observables: deviation series, aggregate center, internal-state
// distributions, peak positions, local mean run lengths, plateaus
//==============================================================================

// Time series of max_x |rho - 1| on the diffusion-scaled clock
// t_lambda = t / (lambda0 L^2); one sample per averaging window.
struct DeviationSeries {
    std::vector<double> t_lambda;
    std::vector<double> max_dev;

    void push(double tl, double dev) {
        t_lambda.push_back(tl);
        max_dev.push_back(dev);
    }
    std::size_t size() const { return t_lambda.size(); }
};

// Time average of the maximum deviation over the second half of the run:
//   delta_rho_bar = (2/T_lambda) * integral_{T_lambda/2}^{T_lambda} max_x|rho-1| dt_lambda
// by trapezoidal quadrature on the available samples. Throws
// InsufficientCoverage when the series does not span the window.
double time_avg_deviation(const DeviationSeries& s, double T_lambda);

// Center of the aggregate: center of the cell where S is maximal; ties broken
// by the smallest cell index.
double find_center(const ScalarField& S);

struct BinSpec {
    double lo;
    double hi;
    int n = 101;
    double width() const { return (hi - lo) / n; }
    double center(int b) const { return lo + (b + 0.5) * width(); }
};

// Local distributions of the internal state at distance r from the center x0:
//   f_r."plus"(y)  = (f^+(x0 - r, y) + f^-(x0 + r, y)) / 2   (toward center)
//   f_r."minus"(y) = (f^+(x0 + r, y) + f^-(x0 - r, y)) / 2   (away from center)
// Each f_rside is normalized to the full local density rho_r (the convention
// that makes the run-length bounds attainable): sum(f) * dy = rho_r.
struct InternalHistogram {
    double r = 0.0;
    double rho_r = 0.0; // (rho(x0-r) + rho(x0+r)) / 2 from the sampled counts
    BinSpec bins{-1.5, 1.5, 101};
    std::vector<double> count_plus;  // raw tallies (out-of-range y clamped to edge bins)
    std::vector<double> count_minus;
    long n_samples = 0;   // ensemble snapshots accumulated
    long n_bar = 0;       // particles per cell in the uniform state

    // Normalized density value of bin b: f(y_b) with integral rho_r.
    double f_plus(int b) const;
    double f_minus(int b) const;
    double total_plus() const;
    double total_minus() const;
};

// Bins one ensemble snapshot. x0 is the aggregate center, r the distance
// (both in domain units); cells are selected by wrapping x0 -+ r. Throws
// EmptySample when either sampled cell holds no particles.
InternalHistogram internal_histogram(const ParticleEnsemble& ens, const Grid1D& grid,
                                     long n_bar, double x0, double r,
                                     const BinSpec& bins);

// Accumulates another snapshot into an existing histogram (same bins/cells).
void accumulate_histogram(InternalHistogram& h, const ParticleEnsemble& ens,
                          const Grid1D& grid, double x0);

enum class Side { plus, minus };

// Internal-state value at the maximal bin (ties -> lower y), refined by
// 3-point parabolic interpolation around the mode.
double peak_position(const InternalHistogram& h, Side side);

// Local mean run lengths (xi_r^+, xi_r^-): histogram-weighted means of
// 1/(lambda0 Lambda_delta(y)). Bounded in [1/(lambda0(1+chi)), 1/(lambda0(1-chi))].
std::pair<double, double> mean_run_length(const InternalHistogram& h,
                                          const ModelParams& p);

struct RunLengthProfile {
    std::vector<double> r;
    std::vector<double> xi_plus;
    std::vector<double> xi_minus;
    double lower_bound = 0.0; // 1/(lambda0(1+chi))
    double upper_bound = 0.0; // 1/(lambda0(1-chi))
};

// Peak density deviation Delta rho = max_i rho_i - 1.
double peak_density(const ScalarField& rho);

struct PlateauReport {
    bool has_plateau = false;
    int extent = 0;     // contiguous cells around the max within tol*rho_max
    bool uniform = false; // degenerate: the whole domain qualified
};

// Maximal contiguous arc around the maximum where |rho - rho_max| < tol*rho_max.
PlateauReport detect_plateau(const ScalarField& rho, double tol);

} // namespace aggsim
