#include "ellopt/ssn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ellopt {

namespace {

Scalar proj(Scalar lo, Scalar hi, Scalar t) { return std::min(hi, std::max(lo, t)); }

Vector masked(const BoolArray& mask, const Vector& v) {
  return mask.select(v.array(), 0.0).matrix();
}

}  // namespace

Scalar psi(Scalar t, const Params& p) {
  if (p.gamma > 0) {
    const Scalar lambda = proj(-1.0, 1.0, -t / p.gamma);
    return proj(p.alpha, p.beta, -(t + p.gamma * lambda) / p.kappa);
  }
  return proj(p.alpha, p.beta, -t / p.kappa);
}

Scalar g_select(Scalar t, const Params& p) {
  if (p.gamma > 0) {
    if ((t > -p.gamma - p.kappa * p.beta && t < -p.gamma) ||
        (t > p.gamma && t < p.gamma - p.kappa * p.alpha))
      return -1.0 / p.kappa;
    return 0.0;
  }
  if (t > -p.kappa * p.beta && t < -p.kappa * p.alpha) return -1.0 / p.kappa;
  return 0.0;
}

SetPartition classify(const Vector& phi, const Params& p) {
  SetPartition part;
  part.label.resize(std::size_t(phi.size()));
  part.active.resize(phi.size());
  part.inactive.resize(phi.size());

  for (Index i = 0; i < phi.size(); ++i) {
    const Scalar t = phi(i);
    SetLabel l;
    if (p.gamma > 0) {
      if (t <= -p.gamma - p.kappa * p.beta)
        l = SetLabel::A_beta;
      else if (t < -p.gamma)
        l = SetLabel::J_plus;
      else if (t <= p.gamma)
        l = SetLabel::A_zero;
      else if (t < p.gamma - p.kappa * p.alpha)
        l = SetLabel::J_minus;
      else
        l = SetLabel::A_alpha;
    } else {
      if (t <= -p.kappa * p.beta)
        l = SetLabel::A_beta;
      else if (t < -p.kappa * p.alpha)
        l = SetLabel::J;
      else
        l = SetLabel::A_alpha;
    }
    part.label[std::size_t(i)] = l;
    const bool inactive =
        l == SetLabel::J_plus || l == SetLabel::J_minus || l == SetLabel::J;
    part.inactive(i) = inactive;
    part.active(i) = !inactive;
  }
  return part;
}

Vector residual_w(const Vector& u, const Vector& phi, const SetPartition& part,
                  const Params& p) {
  if (u.size() != phi.size() || part.size() != u.size())
    throw std::invalid_argument("residual_w: length mismatch");

  Vector w(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    switch (part.label[std::size_t(i)]) {
      case SetLabel::A_beta:
        if (!std::isfinite(p.beta))
          throw ModelError("residual_w: active upper bound is infinite");
        w(i) = -u(i) + p.beta;
        break;
      case SetLabel::J_plus:
        w(i) = -u(i) - (phi(i) + p.gamma) / p.kappa;
        break;
      case SetLabel::A_zero:
        w(i) = -u(i);
        break;
      case SetLabel::J_minus:
        w(i) = -u(i) - (phi(i) - p.gamma) / p.kappa;
        break;
      case SetLabel::A_alpha:
        if (!std::isfinite(p.alpha))
          throw ModelError("residual_w: active lower bound is infinite");
        w(i) = -u(i) + p.alpha;
        break;
      case SetLabel::J:
        w(i) = -u(i) - phi(i) / p.kappa;
        break;
    }
  }
  return w;
}

Vector hessian_apply(const PdeContext& ctx, const Vector& y, const Vector& phi,
                     const BoolArray& jmask, const Vector& v) {
  const Vector vj = masked(jmask, v);
  const Vector z = solve_linearized(ctx, y, vj);
  const Vector eta = solve_linearized_adjoint(ctx, y, phi, z);
  return masked(jmask, eta + ctx.problem.params.kappa * vj);
}

QpResult solve_qp(const PdeContext& ctx, const Vector& y, const Vector& phi,
                  const SetPartition& part, const Vector& b, const SsnOptions& opts) {
  if (b.size() != part.size()) throw std::invalid_argument("solve_qp: length mismatch");
  for (Index i = 0; i < b.size(); ++i)
    if (!part.inactive(i) && b(i) != 0.0)
      throw std::invalid_argument("solve_qp: b has support outside the inactive set");

  const LinearOperator op{b.size(), [&](const Vector& x) {
                            return hessian_apply(ctx, y, phi, part.inactive, x);
                          }};
  CgResult cg;
  try {
    cg = cg_solve(op, b, opts.cg_tol, opts.cg_max, nullptr, &ctx.ops.M);
  } catch (const DefinitenessError& e) {
    throw DefinitenessError(
        std::string("solve_qp: second-order condition failed on the inactive set (") +
            e.what() + ")",
        e.direction());
  }
  if (!cg.converged)
    throw NonconvergenceError("solve_qp: CG did not converge", 0.0, cg.iterations);
  return {std::move(cg.x), cg.iterations};
}

Diagnostics diagnostics(const PdeContext& ctx, const Vector& u, const Vector& phi,
                        const Params& p, Scalar eps) {
  Diagnostics d;
  const auto part = classify(phi, p);

  if (p.gamma > 0) {
    d.lambda.resize(phi.size());
    for (Index i = 0; i < phi.size(); ++i)
      d.lambda(i) = proj(-1.0, 1.0, -phi(i) / p.gamma);
  }

  for (Index i = 0; i < u.size(); ++i)
    d.kkt_residual = std::max(d.kkt_residual, std::abs(u(i) - psi(phi(i), p)));

  const auto measure_of = [&](SetLabel a, SetLabel b) {
    BoolArray mask(part.size());
    for (Index i = 0; i < part.size(); ++i) {
      const SetLabel l = part.label[std::size_t(i)];
      mask(i) = (l == a || l == b);
    }
    return set_measure(ctx.mesh, mask);
  };
  d.measure_inactive = p.gamma > 0 ? measure_of(SetLabel::J_plus, SetLabel::J_minus)
                                   : measure_of(SetLabel::J, SetLabel::J);
  d.measure_a_beta = measure_of(SetLabel::A_beta, SetLabel::A_beta);
  d.measure_a_alpha = measure_of(SetLabel::A_alpha, SetLabel::A_alpha);
  d.measure_a_zero =
      p.gamma > 0 ? measure_of(SetLabel::A_zero, SetLabel::A_zero) : 0.0;

  // Discrete surrogate of the strict-complementarity set Sigma: nodes where
  // the control sits on a bound with vanishing combined multiplier, or
  // where |phi| grazes gamma.
  BoolArray sigma(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const Scalar lam = p.gamma > 0 ? d.lambda(i) : 0.0;
    const Scalar mult = phi(i) + p.kappa * u(i) + p.gamma * lam;
    const bool at_bound = std::abs(u(i) - p.alpha) <= eps || std::abs(u(i) - p.beta) <= eps;
    bool in_sigma = at_bound && std::abs(mult) <= eps;
    if (p.gamma > 0)
      in_sigma = in_sigma || std::abs(std::abs(phi(i)) - p.gamma) <= eps;
    sigma(i) = in_sigma;
  }
  d.sigma_measure = set_measure(ctx.mesh, sigma);

  if (p.gamma > 0)
    for (Index i = 0; i < u.size(); ++i)
      if (std::abs(phi(i)) <= p.gamma - eps)
        d.sparsity_violation = std::max(d.sparsity_violation, std::abs(u(i)));

  return d;
}

SsnResult ssn_solve(const PdeContext& ctx, const Vector& u0, const SsnOptions& opts) {
  if (u0.size() != ctx.ops.n_nodes)
    throw std::invalid_argument("ssn_solve: u0 length mismatch");
  const Params& p = ctx.problem.params;
  p.validate();

  SsnResult res;
  res.u = u0;

  const auto wrap = [](int j, const char* stage, const std::exception& e) {
    return NonconvergenceError("ssn iteration " + std::to_string(j) + " (" + stage +
                                   "): " + e.what(),
                               0.0, j);
  };

  auto state = solve_state(ctx, res.u, Vector::Zero(ctx.ops.n_nodes));
  res.y = std::move(state.y);
  int newton_iters = state.newton_iters;
  Scalar objective_cur = objective(ctx, res.u, res.y);

  auto& record = res.record;
  for (int j = 0; j < opts.max_outer; ++j) {
    Vector w, v;
    int cg_iters = 0;
    try {
      res.phi = solve_adjoint(ctx, res.y);
      res.partition = classify(res.phi, p);
      w = residual_w(res.u, res.phi, res.partition, p);

      const Vector aw = masked(res.partition.active, w);
      const Vector z = solve_linearized(ctx, res.y, aw);
      const Vector eta = solve_linearized_adjoint(ctx, res.y, res.phi, z);
      const Vector b =
          masked(res.partition.inactive, p.kappa * w - eta);

      auto qp = solve_qp(ctx, res.y, res.phi, res.partition, b, opts);
      cg_iters = qp.cg_iters;
      v = aw + masked(res.partition.inactive, qp.v);
    } catch (const NonconvergenceError& e) {
      throw wrap(j, "subproblem", e);
    } catch (const DefinitenessError& e) {
      throw DefinitenessError("ssn iteration " + std::to_string(j) + ": " + e.what(),
                              e.direction());
    }

    const Vector u_next = res.u + v;
    const Scalar delta =
        norm_lumped(ctx, v) / std::max(1.0, norm_lumped(ctx, u_next));

    // The state at u_{j+1} feeds both the J-equality stopping test and the
    // next iteration (warm start).
    StateResult next_state;
    try {
      next_state = solve_state(ctx, u_next, res.y);
    } catch (const NonconvergenceError& e) {
      throw wrap(j, "state", e);
    }
    const Scalar objective_next = objective(ctx, u_next, next_state.y);

    record.rows.push_back({j, objective_cur, delta, newton_iters, cg_iters});

    res.u = u_next;
    res.y = std::move(next_state.y);
    newton_iters = next_state.newton_iters;

    const bool objective_settled = objective_next == objective_cur;
    objective_cur = objective_next;
    if (delta < opts.tol || objective_settled) {
      record.converged = true;
      break;
    }
  }

  // Final evaluation-only row mirroring the convergence tables.
  record.rows.push_back({int(record.rows.size()), objective_cur, std::nullopt,
                         newton_iters, std::nullopt});

  res.phi = solve_adjoint(ctx, res.y);
  res.partition = classify(res.phi, p);
  record.diag = diagnostics(ctx, res.u, res.phi, p, opts.sigma_eps);
  return res;
}

}  // namespace ellopt
