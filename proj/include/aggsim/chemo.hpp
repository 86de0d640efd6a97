#pragma once
#include <vector>

#include "aggsim/model.hpp"

namespace aggsim {

//==============================================================================
// Chemoattractant field solvers on the uniform periodic grid
//==============================================================================

// One explicit Euler step of
//   sigma_S (S' - S)/dt = (D_S/dx^2)(S_{i+1} - 2 S_i + S_{i-1}) - S_i + rho_i
// with periodic neighbors. Throws CflViolation when dt exceeds the explicit
// stability bound sigma_S / (2 D_S/dx^2 + 1).
ScalarField step_chemo_explicit(const ScalarField& S, const ScalarField& rho,
                                double dt, const ModelParams& p);

// Quasi-static balance  -D_S dxx S + S = rho  (periodic), solved directly by
// cyclic tridiagonal elimination. Residual max-norm <= 1e-10 * max|rho|.
ScalarField solve_chemo_quasistatic(const ScalarField& rho, const ModelParams& p);

// Centered difference of ln S at cell centers: (ln S_{i+1} - ln S_{i-1})/(2dx).
ScalarField gradient_log(const ScalarField& S);

// Solves a cyclic tridiagonal system: sub[i] x_{i-1} + diag[i] x_i +
// sup[i] x_{i+1} = rhs[i] with wrap-around sub[0] x_{n-1} and sup[n-1] x_0
// (Sherman-Morrison correction over the non-cyclic Thomas solve). Exposed for
// tests. Throws SingularSystem if elimination hits a zero pivot.
std::vector<double> solve_cyclic_tridiagonal(std::vector<double> sub,
                                             std::vector<double> diag,
                                             std::vector<double> sup,
                                             std::vector<double> rhs);

} // namespace aggsim
