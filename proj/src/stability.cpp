#include "aggsim/stability.hpp"

#include <cmath>

namespace aggsim {

double growth_rate(const DispersionQuery& q) {
    const double k2 = q.k * q.k;
    const double stiffness = q.chi / q.delta;
    return -k2 * (1.0 - q.alpha * stiffness / ((1.0 + q.alpha) * (1.0 + q.D_S * k2)));
}

double critical_stiffness(double k, double alpha, double D_S) {
    return (1.0 + alpha) / alpha * (1.0 + D_S * k * k);
}

UnstableMode most_unstable_mode(const ModelParams& p, double L, int n_max) {
    UnstableMode best;
    for (int n = 1; n <= n_max; ++n) {
        const double k = 2.0 * M_PI * n / L;
        const double mu = growth_rate({k, p.alpha, p.chi, p.delta, p.D_S});
        if (mu > 0.0 && (best.all_stable || mu > best.mu)) {
            best.all_stable = false;
            best.n = n;
            best.k = k;
            best.mu = mu;
        }
    }
    return best;
}

Stability classify(double delta_rho_bar) {
    if (delta_rho_bar < 0.01) return Stability::stable;
    if (delta_rho_bar < 0.1) return Stability::intermediate;
    return Stability::unstable;
}

std::string to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::intermediate: return "intermediate";
        default: return "unstable";
    }
}

} // namespace aggsim
