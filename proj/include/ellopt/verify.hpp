#pragma once

#include <array>

#include "ellopt/ssn.hpp"

namespace ellopt {

/// Finite-difference validation summary. Errors are recorded at three
/// steps (100 h, 10 h, h); the observed order comes from the two largest
/// steps, where central-difference truncation dominates rounding.
struct FdReport {
  int probes = 0;
  std::array<Scalar, 3> steps{};
  std::array<Scalar, 3> errors{};  // max relative error per step
  Scalar max_rel_error = 0;        // error at the requested step h
  Scalar observed_order = 0;
};

/// Compare the adjoint-based directional derivative sum M (phi + kappa u) v
/// against central differences of the discrete smooth objective. Guarded to
/// meshes of at most 5000 nodes and h in [1e-7, 1e-3].
FdReport check_gradient(const PdeContext& ctx, const Vector& u, int probes, Scalar h);

/// Compare the Hessian-vector oracle (inactive set = all nodes) against
/// central differences of the gradient map u -> phi_u + kappa u.
FdReport check_hessian(const PdeContext& ctx, const Vector& u, int probes, Scalar h);

/// Materialize the reduced Hessian on the inactive set column by column and
/// solve the dense system directly (Cholesky). Guarded to at most 300
/// inactive nodes. Fails with DefinitenessError when the factorization
/// breaks down. When out_matrix is given, the assembled dense operator is
/// stored there.
Vector dense_qp_oracle(const PdeContext& ctx, const Vector& y, const Vector& phi,
                       const SetPartition& part, const Vector& b,
                       Matrix* out_matrix = nullptr);

}  // namespace ellopt
