#include "aggsim/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aggsim/chemo.hpp"
#include "pde_recorder.hpp"

namespace aggsim {

namespace {

// Neumaier-compensated sum: the marginal/mass contracts are tighter than
// naive accumulation over 200 m-cells reliably delivers.
struct CompensatedSum {
    double s = 0.0, c = 0.0;
    void add(double v) {
        const double t = s + v;
        c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

inline double pos(double a) { return a > 0.0 ? a : 0.0; }
inline double neg(double a) { return a < 0.0 ? -a : 0.0; }

void check_S_positive(const ScalarField& S, double t) {
    for (int i = 0; i < S.grid.I; ++i) {
        if (!(S[i] > 0.0)) {
            std::ostringstream os;
            os << "asymptotic step: S[" << i << "] = " << S[i]
               << " is not positive at t = " << t;
            throw NonPositiveConcentration(os.str());
        }
    }
}

} // namespace

double PhaseDensity::mass() const {
    CompensatedSum cs;
    for (double v : values) cs.add(v);
    return cs.value() * grid.dx * m.dm;
}

ScalarField marginal_density(const PhaseDensity& p) {
    ScalarField rho(p.grid);
    for (int i = 0; i < p.grid.I; ++i) {
        CompensatedSum cs;
        const double* row = p.values.data() + static_cast<std::size_t>(i) * p.m.K;
        for (int k = 0; k < p.m.K; ++k) cs.add(row[k]);
        rho[i] = cs.value() * p.m.dm;
    }
    return rho;
}

double step_asymptotic(PhaseDensity& p, const ScalarField& S,
                       const AsymptoticConfig& cfg, double dt_cap) {
    const Grid1D& g = p.grid;
    const int I = g.I;
    const int K = p.m.K;
    const double dm = p.m.dm;
    const double tau_t = cfg.params.tau_tilde;
    const double delta = cfg.params.delta;
    const double chi = cfg.params.chi;
    check_S_positive(S, p.t);

    // Cell and face values of M = ln S; faces use the arithmetic mean of S.
    std::vector<double> M(I), Mf(I); // Mf[i] is face i+1/2
    double max_abs_M = 0.0, max_Mf = -1e300;
    for (int i = 0; i < I; ++i) {
        M[i] = std::log(S[i]);
        max_abs_M = std::max(max_abs_M, std::abs(M[i]));
    }
    for (int i = 0; i < I; ++i) {
        const int ip = i + 1 == I ? 0 : i + 1;
        Mf[i] = std::log(0.5 * (S[i] + S[ip]));
        max_Mf = std::max(max_Mf, Mf[i]);
    }

    // Positivity-preserving harmonic CFL: total outflow coefficient <= 0.9.
    const double m_end = p.m.Y - 0.5 * dm; // largest |m| cell center
    const double amax = max_abs_M + m_end;
    const double zmax = (max_Mf + m_end) / delta;
    const double lam_min = 1.0 - chi * zmax / std::sqrt(1.0 + zmax * zmax);
    double dt = 0.9 / (2.0 / (g.dx * g.dx * lam_min) + amax / (tau_t * dm));
    if (cfg.dt_max > 0.0) dt = std::min(dt, cfg.dt_max);
    if (dt_cap > 0.0) dt = std::min(dt, dt_cap);
    if (!(dt > 0.0)) throw CflViolation("asymptotic step: nonpositive time step");

    const double cdif = dt / (g.dx * g.dx);
    const double cadv = dt / (tau_t * dm);
    std::vector<double> pn(p.values.size());
    std::vector<double> lam_lo(K), lam_hi(K); // 1/Lambda at faces i-1/2, i+1/2
    std::vector<double> psi(K + 1);           // m-fluxes of one column
    const double inv_delta = 1.0 / delta;

    auto fill_inv_lambda = [&](double mface, std::vector<double>& out) {
        for (int k = 0; k < K; ++k) {
            const double z = (mface - p.m.center(k)) * inv_delta;
            out[k] = 1.0 / (1.0 - chi * z / std::sqrt(1.0 + z * z));
        }
    };

    fill_inv_lambda(Mf[I - 1], lam_lo); // face -1/2 wraps to I-1+1/2
    for (int i = 0; i < I; ++i) {
        fill_inv_lambda(Mf[i], lam_hi);
        const int ip = i + 1 == I ? 0 : i + 1;
        const int im = i == 0 ? I - 1 : i - 1;
        const double* row = p.values.data() + static_cast<std::size_t>(i) * K;
        const double* rup = p.values.data() + static_cast<std::size_t>(ip) * K;
        const double* rdn = p.values.data() + static_cast<std::size_t>(im) * K;
        double* out = pn.data() + static_cast<std::size_t>(i) * K;

        psi[0] = 0.0;
        psi[K] = 0.0;
        for (int k = 1; k < K; ++k)
            psi[k] = pos(M[i] - p.m.center(k - 1)) * row[k - 1] -
                     neg(M[i] - p.m.center(k)) * row[k];

        for (int k = 0; k < K; ++k) {
            const double diff =
                (rup[k] - row[k]) * lam_hi[k] - (row[k] - rdn[k]) * lam_lo[k];
            const double v = row[k] + cdif * diff - cadv * (psi[k + 1] - psi[k]);
            if (v < -1e-12) {
                std::ostringstream os;
                os << "asymptotic step: p(" << i << "," << k << ") = " << v
                   << " went negative at t = " << p.t;
                throw NegativeDensity(os.str());
            }
            out[k] = v;
        }
        lam_lo.swap(lam_hi); // face i+1/2 becomes the next column's face i-1/2
    }

    p.values.swap(pn);
    p.t += dt;
    return dt;
}

RunRecord run_asymptotic(const AsymptoticConfig& cfg, PhaseDensity* p_final) {
    require_valid(cfg.params);
    if (cfg.grid.I < 4)
        throw ValidationError("asymptotic grid needs at least 4 cells");
    if (cfg.grid.L != cfg.params.L)
        throw ValidationError("asymptotic grid length must equal params.L");
    if (!(cfg.T_end > 0)) throw ValidationError("asymptotic T_end must be positive");
    if (cfg.m_axis.K < 3)
        throw ValidationError("asymptotic m-axis needs at least 3 cells");

    ScalarField rho0 = initial_density(cfg.grid, cfg.perturbation);
    ScalarField S = solve_chemo_quasistatic(rho0, cfg.params);
    check_S_positive(S, 0.0);

    MAxis ax = cfg.m_axis;
    if (ax.Y <= 0.0) {
        double max_abs_M = 0.0;
        for (int i = 0; i < cfg.grid.I; ++i)
            max_abs_M = std::max(max_abs_M, std::abs(std::log(S[i])));
        ax.Y = std::max(4.0 * max_abs_M, 1.0);
    }
    ax.dm = 2.0 * ax.Y / ax.K;

    PhaseDensity p;
    p.grid = cfg.grid;
    p.m = ax;
    p.values.assign(static_cast<std::size_t>(cfg.grid.I) * ax.K, 0.0);
    p.t = 0.0;
    for (int i = 0; i < cfg.grid.I; ++i) {
        const double Mi = std::log(S[i]);
        int k = static_cast<int>(std::floor((Mi + ax.Y) / ax.dm));
        k = std::clamp(k, 0, ax.K - 1);
        p.at(i, k) = rho0[i] / ax.dm; // whole column mass in one m-cell
    }
    const double mass0 = p.mass();

    detail::PdeRecorder rec(cfg.params, cfg.grid, rho0, S, cfg.avg_window,
                            cfg.snapshots_tlambda, cfg.T_end,
                            cfg.stop_at_stationary);
    long long steps = 0;
    const double tol = 1e-9;
    ScalarField rho = rho0;
    while (p.t < cfg.T_end - tol) {
        const double boundary = rec.next_boundary(p.t);
        const double before = p.t;
        step_asymptotic(p, S, cfg, boundary - p.t);
        if (p.t > boundary - tol) p.t = boundary; // land exactly on outputs
        ++steps;

        rho = marginal_density(p);
        double rmax = 0.0;
        for (int i = 0; i < cfg.grid.I; ++i) rmax = std::max(rmax, rho[i]);
        if (rmax > 1e6) {
            std::ostringstream os;
            os << "asymptotic run: density blowup (max rho = " << rmax
               << ") at t = " << p.t;
            throw FieldBlowup(os.str());
        }
        S = solve_chemo_quasistatic(rho, cfg.params);

        // m-domain adequacy: the boundary cells must stay essentially empty.
        CompensatedSum edge;
        for (int i = 0; i < cfg.grid.I; ++i) {
            edge.add(p.at(i, 0));
            edge.add(p.at(i, ax.K - 1));
        }
        if (edge.value() * cfg.grid.dx * ax.dm > 1e-8 * mass0) {
            std::ostringstream os;
            os << "asymptotic run: m-boundary cells hold "
               << edge.value() * cfg.grid.dx * ax.dm / mass0
               << " of the mass at t = " << p.t
               << "; enlarge the m-domain half-width Y";
            throw DomainTooSmall(os.str());
        }

        if (!rec.after_step(p.t, p.t - before, rho, S)) break;
    }
    if (p_final) *p_final = p;
    return rec.take(p.t, rho, S, steps);
}

} // namespace aggsim
