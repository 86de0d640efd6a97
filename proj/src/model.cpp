#include "aggsim/model.hpp"

#include <cmath>
#include <sstream>

namespace aggsim {

ModelParams ModelParams::make(double lambda0, double tau, double delta, double chi,
                              double D_S, double L, double sigma, double sigma_S) {
    ModelParams p;
    p.lambda0 = lambda0;
    p.tau = tau;
    p.delta = delta;
    p.chi = chi;
    p.D_S = D_S;
    p.L = L;
    p.sigma = sigma;
    p.sigma_S = sigma_S;
    p.epsilon = 1.0 / lambda0;
    p.alpha = lambda0 * tau;
    p.tau_tilde = p.epsilon * tau;
    return p;
}

ScalarField log_sensing(const ScalarField& S) {
    ScalarField M(S.grid);
    for (int i = 0; i < S.size(); ++i) {
        if (!(S[i] > 0.0)) {
            std::ostringstream os;
            os << "log_sensing: S[" << i << "] = " << S[i] << " is not positive";
            throw NonPositiveConcentration(os.str());
        }
        M[i] = std::log(S[i]);
    }
    return M;
}

ModelParams nondimensionalize(const DimensionalParams& d, double chi, double delta) {
    auto bad = [](const char* name, double v) {
        std::ostringstream os;
        os << "nondimensionalize: " << name << " = " << v << " must be positive";
        return InvalidDimensional(os.str());
    };
    if (!(d.V0 > 0)) throw bad("V0", d.V0);
    if (!(d.lambda0_dim > 0)) throw bad("lambda0_dim", d.lambda0_dim);
    if (!(d.tau_dim > 0)) throw bad("tau_dim", d.tau_dim);
    if (!(d.D_S_dim > 0)) throw bad("D_S_dim", d.D_S_dim);
    if (!(d.a > 0)) throw bad("a", d.a);
    if (!(d.b > 0)) throw bad("b", d.b);
    if (!(d.rho0 > 0)) throw bad("rho0", d.rho0);
    if (!(d.L_dim > 0)) throw bad("L_dim", d.L_dim);
    if (!(d.t0 > 0)) throw bad("t0", d.t0);

    const double L0 = std::sqrt(d.D_S_dim / d.a); // diffusion length
    ModelParams p = ModelParams::make(
        /*lambda0=*/d.lambda0_dim * L0 / d.V0,
        /*tau=*/d.tau_dim * d.V0 / L0,
        delta, chi,
        /*D_S=*/d.D_S_dim / (d.a * L0 * L0), // = 1 by construction
        /*L=*/d.L_dim / L0,
        /*sigma=*/L0 / (d.t0 * d.V0),
        /*sigma_S=*/1.0 / (d.a * d.t0));
    return p;
}

DimensionalParams redimensionalize(const ModelParams& p, double V0, double a) {
    DimensionalParams d{};
    d.V0 = V0;
    d.a = a;
    d.t0 = 1.0 / (a * p.sigma_S);
    const double L0 = p.sigma * d.t0 * V0;
    d.D_S_dim = a * L0 * L0 * p.D_S;
    d.lambda0_dim = p.lambda0 * V0 / L0;
    d.tau_dim = p.tau * L0 / V0;
    d.L_dim = p.L * L0;
    d.b = 1.0;
    d.rho0 = 1.0;
    return d;
}

std::vector<std::string> validate(const ModelParams& p) {
    std::vector<std::string> bad;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) bad.push_back(msg);
    };
    auto num = [](double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    };
    check(p.lambda0 > 0, "lambda0 must be positive (got " + num(p.lambda0) + ")");
    check(p.tau > 0, "tau must be positive (got " + num(p.tau) + ")");
    check(p.delta > 0, "delta must be positive (got " + num(p.delta) + ")");
    // chi = 0 is allowed: it switches chemotaxis off (Lambda == 1), the
    // control case. Only chi >= 1 would let Lambda reach zero.
    check(p.chi >= 0 && p.chi < 1,
          "chi must lie in [0,1) (got " + num(p.chi) + ")");
    check(p.D_S > 0, "D_S must be positive (got " + num(p.D_S) + ")");
    check(p.L > 0, "L must be positive (got " + num(p.L) + ")");
    check(p.sigma > 0, "sigma must be positive (got " + num(p.sigma) + ")");
    check(p.sigma_S > 0, "sigma_S must be positive (got " + num(p.sigma_S) + ")");
    if (p.lambda0 > 0 && p.tau > 0) {
        // volatile stores force one correctly-rounded result each, so the
        // comparisons stay exact even when the compiler contracts a*b-c
        // into a fused multiply-add (GCC's default at -O2).
        volatile double alpha_ref = p.lambda0 * p.tau;
        volatile double eps_ref = 1.0 / p.lambda0;
        check(p.alpha == alpha_ref,
              "alpha must equal lambda0*tau exactly (got " + num(p.alpha) + ")");
        check(p.epsilon == eps_ref,
              "epsilon must equal 1/lambda0 exactly (got " + num(p.epsilon) + ")");
    }
    return bad;
}

void require_valid(const ModelParams& p) {
    auto bad = validate(p);
    if (!bad.empty()) {
        std::string msg = "invalid model parameters:";
        for (const auto& b : bad) msg += "\n  - " + b;
        throw ValidationError(msg);
    }
}

} // namespace aggsim
