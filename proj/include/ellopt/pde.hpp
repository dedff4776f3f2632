#pragma once

#include "ellopt/fem.hpp"
#include "ellopt/problem.hpp"

namespace ellopt {

/// Discrete realization of the state/adjoint solution operators for one
/// mesh and one problem. Shareable read-only across threads.
struct PdeContext {
  Mesh mesh;
  DiscreteOperator ops;
  ProblemData problem;
  Scalar newton_tol = 5e-14;
  int newton_max = 50;
  Scalar lin_tol = 5e-14;
  int lin_max = 0;            // 0: use 4 n + 200
  bool damped_newton = false; // fallback step halving

  int lin_max_effective() const {
    return lin_max > 0 ? lin_max : int(4 * ops.n_interior() + 200);
  }
};

PdeContext make_context(Mesh mesh, ProblemData problem, Scalar a0 = 0.0);

struct StateResult {
  Vector y;          // full field, zero on the boundary
  int newton_iters;  // linear solves performed (always >= 1)
};

/// Solve the discrete semilinear state equation K y + M f(x,y) = M u on the
/// interior nodes by full-step Newton, warm-started from y_init.
StateResult solve_state(const PdeContext& ctx, const Vector& u, const Vector& y_init);

/// Adjoint: (K^T + diag(M f_y(y))) phi = M L_y(x,y).
Vector solve_adjoint(const PdeContext& ctx, const Vector& y);

/// Linearized state: (K + diag(M f_y(y))) z = M v.
Vector solve_linearized(const PdeContext& ctx, const Vector& y, const Vector& v);

/// Linearized adjoint: (K^T + diag(M f_y(y))) eta
///                       = M (L_yy(x,y) - phi f_yy(x,y)) z.
Vector solve_linearized_adjoint(const PdeContext& ctx, const Vector& y,
                                const Vector& phi, const Vector& z);

/// Smooth objective F(u) = int L(x, y) + kappa/2 int u^2 (trapezoid rule).
Scalar objective_smooth(const PdeContext& ctx, const Vector& u, const Vector& y);

/// Full objective J(u) = F(u) + gamma int |u|.
Scalar objective(const PdeContext& ctx, const Vector& u, const Vector& y);

/// Lumped L2 inner product and norm over all nodes.
Scalar dot_lumped(const PdeContext& ctx, const Vector& a, const Vector& b);
Scalar norm_lumped(const PdeContext& ctx, const Vector& a);

}  // namespace ellopt
