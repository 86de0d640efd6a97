#pragma once
#include <string>

#include "aggsim/model.hpp"

namespace aggsim {

//==============================================================================
// Linear stability of the Keller-Segel limit system
//==============================================================================

struct DispersionQuery {
    double k;     // wavenumber, 2*pi*n/L for integer n >= 1
    double alpha; // relative adaptation time lambda0*tau
    double chi;
    double delta;
    double D_S;
};

// Growth rate of Fourier mode k (diffusion time scale):
//   mu = -k^2 (1 - alpha (chi/delta) / ((1+alpha)(1 + D_S k^2))).
double growth_rate(const DispersionQuery& q);

// Critical stiffness of mode k: (chi/delta)_crit = (1+alpha)/alpha (1+D_S k^2);
// mode k is linearly unstable iff chi/delta exceeds it.
double critical_stiffness(double k, double alpha, double D_S);

struct UnstableMode {
    bool all_stable = true;
    int n = 0;          // mode index, k = 2*pi*n/L (0 when all stable)
    double k = 0.0;
    double mu = 0.0;    // max growth rate over admissible modes
};

// Scans the periodic domain's discrete spectrum k = 2*pi*n/L, n = 1..n_max,
// and returns the most unstable admissible mode.
UnstableMode most_unstable_mode(const ModelParams& p, double L, int n_max = 50);

enum class Stability { stable, intermediate, unstable };

// Fig.-1-style three-way classification of the time-averaged maximum
// deviation; the boundary values 0.01 and 0.1 go to the higher class.
Stability classify(double delta_rho_bar);

std::string to_string(Stability s);

} // namespace aggsim
