#include "aggsim/ks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aggsim/chemo.hpp"
#include "aggsim/rng.hpp"
#include "pde_recorder.hpp"

namespace aggsim {

double chemotactic_coefficient(const ModelParams& p, KsRegime regime) {
    switch (regime) {
        case KsRegime::fast:
            return p.alpha * p.chi / (p.delta * (1.0 + p.alpha));
        case KsRegime::very_fast:
            return 0.0;
        case KsRegime::moderate:
            return p.chi / p.delta;
    }
    throw ValidationError("unknown KS regime");
}

ScalarField initial_density(const Grid1D& grid, const Perturbation& pert) {
    if (!(pert.amplitude >= 0.0) || pert.amplitude >= 1.0)
        throw ValidationError("perturbation amplitude must lie in [0, 1)");
    if (pert.mode < 0) throw ValidationError("perturbation mode must be >= 0");
    ScalarField rho(grid, 1.0);
    if (pert.amplitude == 0.0) return rho;
    if (pert.mode >= 1) {
        const double kx = 2.0 * M_PI * pert.mode / grid.L;
        for (int i = 0; i < grid.I; ++i)
            rho[i] = 1.0 + pert.amplitude * std::cos(kx * grid.center(i));
    } else {
        const std::uint64_t key = rng::seed_key(pert.seed);
        double mean = 0.0;
        for (int i = 0; i < grid.I; ++i) {
            rho[i] = 1.0 + pert.amplitude * (2.0 * rng::u01(key, i, 0) - 1.0);
            mean += rho[i];
        }
        mean /= grid.I;
        for (int i = 0; i < grid.I; ++i) rho[i] -= mean - 1.0;
    }
    return rho;
}

double step_ks(KsState& st, const KsConfig& cfg, double dt_cap) {
    const Grid1D& g = st.rho.grid;
    const int I = g.I;
    const double inv_dx = g.inv_dx;
    const double c = chemotactic_coefficient(cfg.params, cfg.regime);

    const double* S = st.S.values.data();
    const double* rho = st.rho.values.data();

    // Face log-gradients (d_x M)_{i+1/2} and the advective speed bound.
    std::vector<double> a(I); // c (d_x M) at face i+1/2
    double amax = 0.0;
    for (int i = 0; i < I; ++i) {
        if (!(S[i] > 0.0)) {
            std::ostringstream os;
            os << "KS step: S[" << i << "] = " << S[i] << " is not positive at t = "
               << st.t;
            throw NonPositiveConcentration(os.str());
        }
    }
    for (int i = 0; i < I; ++i) {
        const int ip = i + 1 == I ? 0 : i + 1;
        a[i] = c * (std::log(S[ip]) - std::log(S[i])) * inv_dx;
        amax = std::max(amax, std::abs(a[i]));
    }

    // Positivity-preserving step: cell i loses mass through its right face
    // when a_i > 0 and through its left face when a_{i-1} < 0, on top of the
    // diffusive outflow 2 dt/dx^2. Bounding the summed outflow coefficient by
    // 0.9 keeps rho >= 0 rigorously; the result also satisfies the one-term
    // bounds dt <= 0.9 dx^2/2 and dt <= 0.9 dx/max|a| separately (a bare min
    // of those two admits negative cells where both mechanisms bind at once).
    double outmax = 0.0;
    for (int i = 0; i < I; ++i) {
        const int im = i == 0 ? I - 1 : i - 1;
        const double out = std::max(a[i], 0.0) + std::max(-a[im], 0.0);
        outmax = std::max(outmax, out);
    }
    double dt = 0.9 / (2.0 * inv_dx * inv_dx + outmax * inv_dx);
    if (cfg.dt_max > 0.0) dt = std::min(dt, cfg.dt_max);
    if (dt_cap > 0.0) dt = std::min(dt, dt_cap);
    if (!(dt > 0.0)) throw CflViolation("KS step: nonpositive time step");

    // Total face flux: upwind chemotactic part plus centered diffusive part.
    std::vector<double> F(I);
    for (int i = 0; i < I; ++i) {
        const int ip = i + 1 == I ? 0 : i + 1;
        const double up = a[i] >= 0.0 ? rho[i] : rho[ip];
        F[i] = a[i] * up - (rho[ip] - rho[i]) * inv_dx;
    }
    ScalarField rho_new(g);
    double rmin = 1e300, rmax = 0.0;
    for (int i = 0; i < I; ++i) {
        const int im = i == 0 ? I - 1 : i - 1;
        const double v = rho[i] - dt * (F[i] - F[im]) * inv_dx;
        rho_new[i] = v;
        rmin = v < rmin ? v : rmin;
        rmax = v > rmax ? v : rmax;
    }
    if (rmin < -1e-12) {
        std::ostringstream os;
        os << "KS step: density went negative (min rho = " << rmin
           << ") at t = " << st.t;
        throw NegativeDensity(os.str());
    }
    if (rmax > 1e6) {
        std::ostringstream os;
        os << "KS step: density blowup (max rho = " << rmax << ") at t = " << st.t;
        throw FieldBlowup(os.str());
    }

    st.rho = std::move(rho_new);
    st.S = solve_chemo_quasistatic(st.rho, cfg.params);
    st.t += dt;
    return dt;
}

RunRecord run_ks(const KsConfig& cfg) {
    require_valid(cfg.params);
    if (cfg.grid.I < 4) throw ValidationError("KS grid needs at least 4 cells");
    if (cfg.grid.L != cfg.params.L)
        throw ValidationError("KS grid length must equal params.L");
    if (!(cfg.T_end > 0)) throw ValidationError("KS T_end must be positive");

    KsState st;
    st.rho = initial_density(cfg.grid, cfg.perturbation);
    st.S = solve_chemo_quasistatic(st.rho, cfg.params);
    st.t = 0.0;

    detail::PdeRecorder rec(cfg.params, cfg.grid, st.rho, st.S, cfg.avg_window,
                            cfg.snapshots_tlambda, cfg.T_end,
                            cfg.stop_at_stationary);
    long long steps = 0;
    const double tol = 1e-9;
    while (st.t < cfg.T_end - tol) {
        const double boundary = rec.next_boundary(st.t);
        const double before = st.t;
        step_ks(st, cfg, boundary - st.t);
        if (st.t > boundary - tol) st.t = boundary; // land exactly on outputs
        ++steps;
        if (!rec.after_step(st.t, st.t - before, st.rho, st.S)) break;
    }
    return rec.take(st.t, st.rho, st.S, steps);
}

} // namespace aggsim
