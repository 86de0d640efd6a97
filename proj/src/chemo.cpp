#include "aggsim/chemo.hpp"

#include <cmath>
#include <sstream>

namespace aggsim {

ScalarField step_chemo_explicit(const ScalarField& S, const ScalarField& rho,
                                double dt, const ModelParams& p) {
    const Grid1D& g = S.grid;
    const double dx2 = g.dx * g.dx;
    const double bound = p.sigma_S / (2.0 * p.D_S / dx2 + 1.0);
    if (dt > bound) {
        std::ostringstream os;
        os << "step_chemo_explicit: dt = " << dt
           << " exceeds the explicit stability bound " << bound;
        throw CflViolation(os.str());
    }
    const double c = dt / p.sigma_S;
    const double dcoef = p.D_S / dx2;
    const int I = g.I;
    ScalarField out(g);
    for (int i = 0; i < I; ++i) {
        const double Sm = S[(i + I - 1) % I];
        const double Sp = S[(i + 1) % I];
        out[i] = S[i] + c * (dcoef * (Sp - 2.0 * S[i] + Sm) - S[i] + rho[i]);
    }
    return out;
}

std::vector<double> solve_cyclic_tridiagonal(std::vector<double> sub,
                                             std::vector<double> diag,
                                             std::vector<double> sup,
                                             std::vector<double> rhs) {
    const std::size_t n = diag.size();

    // Plain Thomas elimination, reused for both solves of the correction.
    auto thomas = [n](std::vector<double> a, std::vector<double> b,
                      std::vector<double> c, std::vector<double> d) {
        for (std::size_t i = 1; i < n; ++i) {
            if (b[i - 1] == 0.0) throw SingularSystem("cyclic tridiagonal: zero pivot");
            const double m = a[i] / b[i - 1];
            b[i] -= m * c[i - 1];
            d[i] -= m * d[i - 1];
        }
        if (b[n - 1] == 0.0) throw SingularSystem("cyclic tridiagonal: zero pivot");
        std::vector<double> x(n);
        x[n - 1] = d[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
        return x;
    };

    // Sherman-Morrison: fold the two wrap entries (alpha = sup[n-1], the
    // coupling of row n-1 to x_0; beta = sub[0], row 0 to x_{n-1}) into a
    // rank-one update of the open-chain matrix.
    const double alpha = sup[n - 1];
    const double beta = sub[0];
    const double gamma = -diag[0];
    std::vector<double> b = diag;
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;

    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;

    std::vector<double> x = thomas(sub, b, sup, rhs);
    std::vector<double> z = thomas(sub, b, sup, u);

    const double denom = 1.0 + z[0] + (beta / gamma) * z[n - 1];
    if (denom == 0.0) throw SingularSystem("cyclic tridiagonal: singular correction");
    const double fac = (x[0] + (beta / gamma) * x[n - 1]) / denom;
    for (std::size_t i = 0; i < n; ++i) x[i] -= fac * z[i];
    return x;
}

ScalarField solve_chemo_quasistatic(const ScalarField& rho, const ModelParams& p) {
    const Grid1D& g = rho.grid;
    const int I = g.I;
    const double w = p.D_S / (g.dx * g.dx);
    // (-D_S dxx + 1) S = rho  ->  -w S_{i-1} + (1 + 2w) S_i - w S_{i+1} = rho_i
    std::vector<double> sub(I, -w), diag(I, 1.0 + 2.0 * w), sup(I, -w);
    ScalarField S(g);
    S.values = solve_cyclic_tridiagonal(sub, diag, sup, rho.values);
    return S;
}

ScalarField gradient_log(const ScalarField& S) {
    const ScalarField M = log_sensing(S); // throws NonPositiveConcentration
    const Grid1D& g = S.grid;
    const int I = g.I;
    ScalarField out(g);
    for (int i = 0; i < I; ++i) {
        const double Mp = M[(i + 1) % I];
        const double Mm = M[(i + I - 1) % I];
        out[i] = (Mp - Mm) / (2.0 * g.dx);
    }
    return out;
}

} // namespace aggsim
