#pragma once
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "aggsim/errors.hpp"

namespace aggsim {

//==============================================================================
// Grid and fields
//==============================================================================

// Uniform periodic 1-D mesh. Cell centers sit at x_i = (i + 1/2) dx; this
// convention is fixed project-wide (deposits, interpolation, diagnostics).
struct Grid1D {
    int I = 50;          // number of cells (>= 4)
    double L = 10.0;     // domain length
    double dx = 0.2;     // cell width = L / I
    double inv_dx = 5.0; // cached so indexing uses one multiply everywhere
                         // (deposit, interpolation and diagnostics must agree
                         // on boundary rounding)

    Grid1D() = default;
    Grid1D(int I_, double L_) : I(I_), L(L_), dx(L_ / I_), inv_dx(I_ / L_) {}

    double center(int i) const { return (i + 0.5) * dx; }
    // Cell index of a wrapped position x in [0, L).
    int cell_of(double x) const {
        int i = static_cast<int>(x * inv_dx);
        return i >= I ? I - 1 : i; // x == L-ulp can round up
    }
    bool operator==(const Grid1D& o) const { return I == o.I && L == o.L; }
};

// Cell-averaged scalar on a Grid1D (used for S, rho, M).
struct ScalarField {
    Grid1D grid;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(const Grid1D& g, double fill = 0.0) : grid(g), values(g.I, fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    int size() const { return grid.I; }

    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s / values.size();
    }
    double max() const {
        double m = values[0];
        for (double v : values) m = v > m ? v : m;
        return m;
    }
    double min() const {
        double m = values[0];
        for (double v : values) m = v < m ? v : m;
        return m;
    }
};

//==============================================================================
// Model parameters
//==============================================================================

// All nondimensional physical parameters plus the derived quantities used by
// the asymptotic machinery. Construct through make() so the derived fields
// (epsilon, alpha, tau_tilde) stay consistent by construction.
struct ModelParams {
    double lambda0 = 10.0; // mean tumbling frequency
    double tau = 0.1;      // adaptation time
    double delta = 0.1;    // response stiffness
    double chi = 0.5;      // modulation amplitude, in (0,1)
    double D_S = 1.0;      // chemoattractant diffusion constant
    double L = 10.0;       // periodic domain length
    double sigma = 1.0;    // kinetic time-scale parameter
    double sigma_S = 1.0;  // chemoattractant time-scale parameter

    // derived
    double epsilon = 0.1;   // 1 / lambda0
    double alpha = 1.0;     // lambda0 * tau
    double tau_tilde = 0.01; // epsilon * tau (large-adaptation scaling)

    static ModelParams make(double lambda0, double tau, double delta, double chi,
                            double D_S = 1.0, double L = 10.0, double sigma = 1.0,
                            double sigma_S = 1.0);
};

// Dimensional inputs for nondimensionalize(). b and rho0 only set the scale of
// S (S0 = b rho0 / a) and drop out of the nondimensional system.
struct DimensionalParams {
    double V0;          // cell speed            [length/time]
    double lambda0_dim; // tumbling frequency    [1/time]
    double tau_dim;     // adaptation time       [time]
    double D_S_dim;     // chemical diffusivity  [length^2/time]
    double a;           // degradation rate      [1/time]
    double b;           // production rate
    double rho0;        // number density
    double L_dim;       // domain length         [length]
    double t0;          // characteristic time   [time]
};

// Bounded tumbling-frequency modulation
//   Lambda_delta(y) = 1 - chi * (y/delta) / sqrt(1 + (y/delta)^2),
// strictly inside [1-chi, 1+chi] for finite y.
inline double modulation(double y, double delta, double chi) {
    double z = y / delta;
    return 1.0 - chi * z / std::sqrt(1.0 + z * z);
}
inline double modulation(double y, const ModelParams& p) {
    return modulation(y, p.delta, p.chi);
}

// Logarithmic sensing M(S) = ln S, cellwise.
ScalarField log_sensing(const ScalarField& S);

// Scale dimensional inputs by the diffusion length L0 = sqrt(D_S_dim / a) and
// the caller's characteristic time t0. The pathway parameters (chi, delta) are
// already dimensionless and are passed through unchanged.
ModelParams nondimensionalize(const DimensionalParams& d, double chi = 0.5,
                              double delta = 0.1);

// Inverse of nondimensionalize given the gauge freedoms (V0, a); b and rho0
// are not recoverable (they cancel) and are returned as 1.
DimensionalParams redimensionalize(const ModelParams& p, double V0, double a);

// Returns every violated invariant, empty when params are valid.
std::vector<std::string> validate(const ModelParams& p);

// Throwing convenience used by engine entry points.
void require_valid(const ModelParams& p);

} // namespace aggsim
