#pragma once

#include <functional>

#include "ellopt/types.hpp"

namespace ellopt {

/// Abstract y = A x with a stated (square) dimension. Realized by sparse
/// matrices, transpose views, diagonal shifts and the matrix-free Hessian.
struct LinearOperator {
  Index dim = 0;
  std::function<Vector(const Vector&)> apply_fn;

  Vector apply(const Vector& x) const {
    if (x.size() != dim)
      throw std::invalid_argument("LinearOperator: dimension mismatch");
    return apply_fn(x);
  }
};

/// y = A x with deterministic per-row accumulation (ascending column index).
Vector spmv(const SparseMatrix& A, const Vector& x);

/// y = A^T x without materializing the transpose.
Vector spmv_transpose(const SparseMatrix& A, const Vector& x);

LinearOperator make_operator(const SparseMatrix& A);

/// x -> A x + d .* x  (or A^T x + d .* x), the shifted operators of the
/// linearized state and adjoint equations.
LinearOperator make_shifted_operator(const SparseMatrix& A, const Vector& d,
                                     bool transpose = false);

struct CgResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
};

/// Conjugate gradients for an operator that is self-adjoint positive
/// definite in the (optionally weighted) inner product <a,b> = sum w a b.
///
/// Returns once the residual satisfies ||b - A x|| <= tol ||b|| in that
/// norm, or flags converged = false at max_iter. b = 0 returns x = 0 in 0
/// iterations. `precond` is a diagonal (Jacobi) preconditioner. A direction
/// with (p, A p) <= 0 raises DefinitenessError carrying p.
CgResult cg_solve(const LinearOperator& op, const Vector& b, Scalar tol,
                  int max_iter, const Vector* precond = nullptr,
                  const Vector* weight = nullptr);

}  // namespace ellopt
