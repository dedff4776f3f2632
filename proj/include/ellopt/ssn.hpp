#pragma once

#include <optional>
#include <vector>

#include "ellopt/pde.hpp"

namespace ellopt {

/// Nodewise classification by adjoint value. For gamma > 0 the five sets
/// are A_beta, J_plus, A_zero, J_minus, A_alpha; for gamma = 0 the inactive
/// set is the single interval J.
enum class SetLabel : int {
  A_beta = 0,
  J_plus = 1,
  A_zero = 2,
  J_minus = 3,
  A_alpha = 4,
  J = 5,  // gamma = 0 only
};

struct SetPartition {
  std::vector<SetLabel> label;
  BoolArray active;    // union of the A sets
  BoolArray inactive;  // union of the J sets

  Index size() const { return Index(label.size()); }
};

struct SsnOptions {
  Scalar tol = 5e-14;       // stopping threshold on delta_j
  int max_outer = 30;
  Scalar cg_tol = 5e-14;    // reduced QP solve
  int cg_max = 500;
  Scalar sigma_eps = 1e-8;  // threshold of the strict-complementarity check

  friend bool operator==(const SsnOptions&, const SsnOptions&) = default;
};

/// Scalar fixed-point map: psi(t) = proj_[alpha,beta](-(t + gamma
/// proj_[-1,1](-t/gamma))/kappa), reducing to proj_[alpha,beta](-t/kappa)
/// for gamma = 0.
Scalar psi(Scalar t, const Params& p);

/// The measurable selection from the Clarke differential of psi: -1/kappa
/// on the open intervals where psi has that slope, 0 elsewhere (including
/// every breakpoint).
Scalar g_select(Scalar t, const Params& p);

SetPartition classify(const Vector& phi, const Params& p);

/// w = -Phi(u) = psi(phi) - u, evaluated through the per-set case list of
/// the Newton residual.
Vector residual_w(const Vector& u, const Vector& phi, const SetPartition& part,
                  const Params& p);

/// Matrix-free reduced Hessian-vector product A_j v = chi_J (eta + kappa v)
/// where z solves the linearized state with source chi_J v and eta the
/// linearized adjoint driven by z.
Vector hessian_apply(const PdeContext& ctx, const Vector& y, const Vector& phi,
                     const BoolArray& jmask, const Vector& v);

struct QpResult {
  Vector v;  // supported on the inactive set
  int cg_iters = 0;
};

/// Solve A_j v = b on the inactive set by CG in the lumped-mass inner
/// product. b must vanish off the inactive set.
QpResult solve_qp(const PdeContext& ctx, const Vector& y, const Vector& phi,
                  const SetPartition& part, const Vector& b, const SsnOptions& opts);

/// Optimality report at a converged pair (u, phi).
struct Diagnostics {
  Vector lambda;                  // proj_[-1,1](-phi/gamma); empty if gamma = 0
  Scalar kkt_residual = 0;        // max-norm of u - psi(phi)
  Scalar measure_inactive = 0;    // |J|
  Scalar measure_a_beta = 0;      // |A^beta|
  Scalar measure_a_alpha = 0;     // |A^alpha|
  Scalar measure_a_zero = 0;      // |A^0| (0 when gamma = 0)
  Scalar sigma_measure = 0;       // measure of the near-degenerate set
  Scalar sparsity_violation = 0;  // max |u| where |phi| <= gamma - eps
};

Diagnostics diagnostics(const PdeContext& ctx, const Vector& u, const Vector& phi,
                        const Params& p, Scalar eps);

struct SsnIterationRow {
  int j = 0;
  Scalar objective = 0;
  std::optional<Scalar> delta;  // absent on the final evaluation-only row
  int newton_iters = 0;
  std::optional<int> cg_iters;
};

struct SsnRecord {
  std::vector<SsnIterationRow> rows;
  bool converged = false;
  Diagnostics diag;
};

struct SsnResult {
  Vector u;
  Vector y;
  Vector phi;
  SetPartition partition;
  SsnRecord record;
};

/// The semismooth Newton outer loop: state solve (warm-started), adjoint
/// solve, classification, Newton residual w_j, curvature solve eta_j,
/// reduced QP on the inactive set, and the update u_{j+1} = u_j + v_j.
/// Stops when delta_j = ||v_j||_M / max(1, ||u_{j+1}||_M) < opts.tol, when
/// two successive objective values are bit-equal, or flags nonconvergence
/// at max_outer.
SsnResult ssn_solve(const PdeContext& ctx, const Vector& u0, const SsnOptions& opts);

}  // namespace ellopt
