#include "ellopt/linalg.hpp"

#include <cmath>

namespace ellopt {

Vector spmv(const SparseMatrix& A, const Vector& x) {
  if (x.size() != A.cols()) throw std::invalid_argument("spmv: dimension mismatch");
  return A * x;
}

Vector spmv_transpose(const SparseMatrix& A, const Vector& x) {
  if (x.size() != A.rows())
    throw std::invalid_argument("spmv_transpose: dimension mismatch");
  return A.transpose() * x;
}

LinearOperator make_operator(const SparseMatrix& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("make_operator: matrix must be square");
  return {A.rows(), [&A](const Vector& x) { return spmv(A, x); }};
}

LinearOperator make_shifted_operator(const SparseMatrix& A, const Vector& d,
                                     bool transpose) {
  if (A.rows() != A.cols() || d.size() != A.rows())
    throw std::invalid_argument("make_shifted_operator: dimension mismatch");
  if (transpose)
    return {A.rows(), [&A, &d](const Vector& x) -> Vector {
              return spmv_transpose(A, x) + d.cwiseProduct(x);
            }};
  return {A.rows(), [&A, &d](const Vector& x) -> Vector {
            return spmv(A, x) + d.cwiseProduct(x);
          }};
}

namespace {

Scalar weighted_dot(const Vector& a, const Vector& b, const Vector* w) {
  if (w) return (a.array() * b.array() * w->array()).sum();
  return a.dot(b);
}

}  // namespace

CgResult cg_solve(const LinearOperator& op, const Vector& b, Scalar tol,
                  int max_iter, const Vector* precond, const Vector* weight) {
  if (tol <= 0) throw std::invalid_argument("cg_solve: tol must be positive");
  if (b.size() != op.dim) throw std::invalid_argument("cg_solve: dimension mismatch");
  if (precond && precond->size() != op.dim)
    throw std::invalid_argument("cg_solve: preconditioner dimension mismatch");
  if (weight && weight->size() != op.dim)
    throw std::invalid_argument("cg_solve: weight dimension mismatch");

  CgResult result;
  result.x = Vector::Zero(op.dim);

  const Scalar b_norm = std::sqrt(weighted_dot(b, b, weight));
  if (b_norm == 0.0) {
    result.converged = true;
    return result;
  }

  Vector r = b;
  Vector z = precond ? Vector(r.cwiseQuotient(*precond)) : r;
  Vector p = z;
  Scalar rz = weighted_dot(r, z, weight);

  for (int k = 1; k <= max_iter; ++k) {
    const Vector q = op.apply(p);
    const Scalar pq = weighted_dot(p, q, weight);
    if (pq <= 0.0)
      throw DefinitenessError(
          "cg_solve: nonpositive curvature (p, A p) = " + std::to_string(pq), p);
    const Scalar alpha = rz / pq;
    result.x += alpha * p;
    r -= alpha * q;
    result.iterations = k;
    if (std::sqrt(weighted_dot(r, r, weight)) <= tol * b_norm) {
      result.converged = true;
      return result;
    }
    z = precond ? Vector(r.cwiseQuotient(*precond)) : r;
    const Scalar rz_next = weighted_dot(r, z, weight);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return result;
}

}  // namespace ellopt
