#include "ellopt/pde.hpp"

#include <cmath>

namespace ellopt {

PdeContext make_context(Mesh mesh, ProblemData problem, Scalar a0) {
  PdeContext ctx;
  ctx.ops = assemble(mesh, a0);
  ctx.mesh = std::move(mesh);
  ctx.problem = std::move(problem);
  return ctx;
}

namespace {

// Interior solve of (K + diag(d)) x = rhs (or the transpose) with
// Jacobi-preconditioned CG at the context's linear tolerance.
Vector solve_shifted(const PdeContext& ctx, const Vector& d, const Vector& rhs,
                     bool transpose, const char* who) {
  const auto op = make_shifted_operator(ctx.ops.K, d, transpose);
  const Vector precond = ctx.ops.K_diag + d;
  const auto result =
      cg_solve(op, rhs, ctx.lin_tol, ctx.lin_max_effective(), &precond);
  if (!result.converged)
    throw NonconvergenceError(std::string(who) + ": linear solve did not reach tol",
                              0.0, result.iterations);
  return result.x;
}

// diag(M f_y(y)) over interior nodes; nonnegative by the monotonicity of f.
Vector reaction_diagonal(const PdeContext& ctx, const Vector& y_full) {
  const Vector fy = eval_nodal(ctx.mesh, ctx.problem.f_y, y_full);
  return ctx.ops.restrict_interior(lumped_weighted_diagonal(ctx.mesh, fy));
}

}  // namespace

StateResult solve_state(const PdeContext& ctx, const Vector& u, const Vector& y_init) {
  if (u.size() != ctx.ops.n_nodes || y_init.size() != ctx.ops.n_nodes)
    throw std::invalid_argument("solve_state: field length mismatch");

  const Vector mu = ctx.ops.restrict_interior(
      ctx.ops.M.cwiseProduct(u));                       // M u, interior
  const Scalar scale = std::max(1.0, mu.norm());

  Vector y = y_init;
  const auto residual = [&](const Vector& y_full) -> Vector {
    const Vector fv = eval_nodal(ctx.mesh, ctx.problem.f, y_full);
    return spmv(ctx.ops.K, ctx.ops.restrict_interior(y_full)) +
           ctx.ops.restrict_interior(ctx.ops.M.cwiseProduct(fv)) - mu;
  };

  // Always performs at least one linear solve, so a warm start at the
  // solution reports one iteration.
  int iters = 0;
  Vector r = residual(y);
  Scalar rn = r.norm();
  while (true) {
    if (iters >= 1 && rn <= ctx.newton_tol * scale) break;
    if (iters >= ctx.newton_max)
      throw NonconvergenceError("solve_state: Newton stalled at residual " +
                                    std::to_string(rn),
                                rn, iters);
    const Vector d = reaction_diagonal(ctx, y);
    const Vector step = solve_shifted(ctx, d, -r, false, "solve_state");
    Vector y_next = y + ctx.ops.embed_interior(step);
    Vector r_next = residual(y_next);
    Scalar rn_next = r_next.norm();
    if (ctx.damped_newton) {
      Scalar t = 1.0;
      for (int back = 0; back < 12 && rn_next > rn && rn > ctx.newton_tol * scale;
           ++back) {
        t *= 0.5;
        y_next = y + t * ctx.ops.embed_interior(step);
        r_next = residual(y_next);
        rn_next = r_next.norm();
      }
    }
    y = std::move(y_next);
    r = std::move(r_next);
    rn = rn_next;
    ++iters;
  }
  return {std::move(y), iters};
}

Vector solve_adjoint(const PdeContext& ctx, const Vector& y) {
  const Vector d = reaction_diagonal(ctx, y);
  const Vector ly = eval_nodal(ctx.mesh, ctx.problem.L_y, y);
  const Vector rhs = ctx.ops.restrict_interior(ctx.ops.M.cwiseProduct(ly));
  return ctx.ops.embed_interior(solve_shifted(ctx, d, rhs, true, "solve_adjoint"));
}

Vector solve_linearized(const PdeContext& ctx, const Vector& y, const Vector& v) {
  const Vector d = reaction_diagonal(ctx, y);
  const Vector rhs = ctx.ops.restrict_interior(ctx.ops.M.cwiseProduct(v));
  return ctx.ops.embed_interior(solve_shifted(ctx, d, rhs, false, "solve_linearized"));
}

Vector solve_linearized_adjoint(const PdeContext& ctx, const Vector& y,
                                const Vector& phi, const Vector& z) {
  const Vector d = reaction_diagonal(ctx, y);
  const Vector lyy = eval_nodal(ctx.mesh, ctx.problem.L_yy, y);
  const Vector fyy = eval_nodal(ctx.mesh, ctx.problem.f_yy, y);
  const Vector source = (lyy - phi.cwiseProduct(fyy)).cwiseProduct(z);
  const Vector rhs = ctx.ops.restrict_interior(ctx.ops.M.cwiseProduct(source));
  return ctx.ops.embed_interior(
      solve_shifted(ctx, d, rhs, true, "solve_linearized_adjoint"));
}

Scalar objective_smooth(const PdeContext& ctx, const Vector& u, const Vector& y) {
  const Vector lv = eval_nodal(ctx.mesh, ctx.problem.L, y);
  return integrate_nodal(ctx.mesh, lv) +
         0.5 * ctx.problem.params.kappa * dot_lumped(ctx, u, u);
}

Scalar objective(const PdeContext& ctx, const Vector& u, const Vector& y) {
  return objective_smooth(ctx, u, y) +
         ctx.problem.params.gamma * integrate_nodal(ctx.mesh, u.cwiseAbs());
}

Scalar dot_lumped(const PdeContext& ctx, const Vector& a, const Vector& b) {
  return (a.array() * b.array() * ctx.ops.M.array()).sum();
}

Scalar norm_lumped(const PdeContext& ctx, const Vector& a) {
  return std::sqrt(dot_lumped(ctx, a, a));
}

}  // namespace ellopt
