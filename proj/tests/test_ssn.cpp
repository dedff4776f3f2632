#include <doctest.h>

#include <cmath>
#include <random>

#include "ellopt/ssn.hpp"

using namespace ellopt;

namespace {

Params example2_params() {
  Params p;
  p.kappa = 0.1;
  p.gamma = 0.05;
  p.alpha = -1.0;
  p.beta = 1.0;
  return p;
}

Params example1_params() {
  Params p;
  p.kappa = 0.002;
  p.gamma = 0.03;
  p.alpha = -12.0;
  p.beta = 12.0;
  return p;
}

PointFunction constant_fn(Scalar v) {
  return [v](Eigen::Ref<const Eigen::RowVectorXd>, Scalar) { return v; };
}

ProblemData flat_problem(Params p) {
  ProblemData data;
  data.params = p;
  data.f = constant_fn(0.0);
  data.f_y = constant_fn(0.0);
  data.f_yy = constant_fn(0.0);
  data.L = constant_fn(0.0);
  data.L_y = constant_fn(0.0);
  data.L_yy = constant_fn(0.0);
  return data;
}

Vector random_field(std::mt19937_64& rng, Index n, Scalar amplitude) {
  std::uniform_real_distribution<Scalar> dist(-amplitude, amplitude);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

// Membership re-derived from the printed interval definitions, one test per
// set, used to cross-check classify.
int independent_label_count(Scalar t, const Params& p, SetLabel l) {
  if (p.gamma > 0) {
    switch (l) {
      case SetLabel::A_beta: return t <= -p.gamma - p.kappa * p.beta;
      case SetLabel::J_plus: return -p.gamma - p.kappa * p.beta < t && t < -p.gamma;
      case SetLabel::A_zero: return std::abs(t) <= p.gamma;
      case SetLabel::J_minus: return p.gamma < t && t < p.gamma - p.kappa * p.alpha;
      case SetLabel::A_alpha: return p.gamma - p.kappa * p.alpha <= t;
      default: return 0;
    }
  }
  switch (l) {
    case SetLabel::A_beta: return t <= -p.kappa * p.beta;
    case SetLabel::J: return -p.kappa * p.beta < t && t < -p.kappa * p.alpha;
    case SetLabel::A_alpha: return -p.kappa * p.alpha <= t;
    default: return 0;
  }
}

}  // namespace

TEST_CASE("psi evaluates the projection formula") {
  const Params p = example2_params();
  CHECK(psi(0.0, p) == 0.0);
  CHECK(psi(0.1, p) == doctest::Approx(-0.5).epsilon(1e-15));  // hand evaluation
  CHECK(psi(10.0, p) == -1.0);
  CHECK(psi(-10.0, p) == 1.0);

  Params nosparse = p;
  nosparse.gamma = 0.0;
  CHECK(psi(0.05, nosparse) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(psi(-1.0, nosparse) == 1.0);
}

TEST_CASE("psi is monotone with range in the box and a dead zone") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<Scalar> dist(-1.0, 1.0);
  for (const Params& p : {example2_params(), example1_params()}) {
    for (int probe = 0; probe < 200; ++probe) {
      Scalar t1 = 30 * dist(rng), t2 = 30 * dist(rng);
      if (t1 > t2) std::swap(t1, t2);
      CHECK(psi(t1, p) >= psi(t2, p));
      CHECK(psi(t1, p) <= p.beta);
      CHECK(psi(t1, p) >= p.alpha);
      const Scalar inside = p.gamma * dist(rng);
      CHECK(psi(inside, p) == 0.0);
    }
  }
}

TEST_CASE("g_select matches the Clarke differential of psi") {
  const Params p = example2_params();
  CHECK(g_select(0.0, p) == 0.0);
  CHECK(g_select(0.1, p) == doctest::Approx(-10.0).epsilon(1e-15));
  for (const Scalar breakpoint : {-0.15, -0.05, 0.05, 0.15})
    CHECK(g_select(breakpoint, p) == 0.0);

  // Pointwise over a grid straddling all breakpoints: the selection must be
  // -1/kappa strictly inside the sloped intervals and 0 strictly outside.
  for (const Params& q : {example2_params(), example1_params()}) {
    const Scalar b1 = -q.gamma - q.kappa * q.beta;
    const Scalar b2 = -q.gamma;
    const Scalar b3 = q.gamma;
    const Scalar b4 = q.gamma - q.kappa * q.alpha;
    const Scalar eps = 1e-9;
    for (const Scalar t : {b1 - 1.0, b1 - eps, b1 + eps, 0.5 * (b1 + b2), b2 - eps,
                           b2 + eps, 0.0, b3 - eps, b3 + eps, 0.5 * (b3 + b4),
                           b4 - eps, b4 + eps, b4 + 1.0}) {
      const bool sloped = (t > b1 && t < b2) || (t > b3 && t < b4);
      CHECK(g_select(t, q) == (sloped ? -1.0 / q.kappa : 0.0));
    }
    for (const Scalar t : {b1, b2, b3, b4}) CHECK(g_select(t, q) == 0.0);
  }

  Params nosparse = example2_params();
  nosparse.gamma = 0.0;
  CHECK(g_select(0.0, nosparse) == -10.0);
  CHECK(g_select(-0.1, nosparse) == 0.0);
  CHECK(g_select(0.1, nosparse) == 0.0);
  CHECK(g_select(0.05, nosparse) == doctest::Approx(0.0));
}

TEST_CASE("classify follows the closed/open boundary pattern") {
  const Params p = example2_params();
  Vector phi(3);
  phi << -0.15, 0.0, 0.1;
  const SetPartition part = classify(phi, p);
  CHECK(part.label[0] == SetLabel::A_beta);  // closed inequality
  CHECK(part.label[1] == SetLabel::A_zero);
  CHECK(part.label[2] == SetLabel::J_minus);
  CHECK(part.active(0));
  CHECK(part.active(1));
  CHECK(part.inactive(2));
}

TEST_CASE("classification partitions the node set for random adjoints") {
  std::mt19937_64 rng(67);
  for (Params p : {example2_params(), example1_params()}) {
    for (const Scalar gamma : {p.gamma, 0.0}) {
      p.gamma = gamma;
      const Vector phi = random_field(rng, 500, 0.5);
      const SetPartition part = classify(phi, p);
      for (Index i = 0; i < phi.size(); ++i) {
        int members = 0;
        for (const SetLabel l : {SetLabel::A_beta, SetLabel::J_plus, SetLabel::A_zero,
                                 SetLabel::J_minus, SetLabel::A_alpha, SetLabel::J})
          members += independent_label_count(phi(i), p, l);
        CHECK(members == 1);
        CHECK(independent_label_count(phi(i), p, part.label[std::size_t(i)]) == 1);
        CHECK(part.active(i) != part.inactive(i));
      }
    }
  }
}

TEST_CASE("residual_w equals psi(phi) - u") {
  std::mt19937_64 rng(71);
  SUBCASE("example 2 parameters") {
    const Params p = example2_params();
    const Vector phi = random_field(rng, 300, 0.4);
    const Vector u = random_field(rng, 300, 2.0);
    const Vector w = residual_w(u, phi, classify(phi, p), p);
    for (Index i = 0; i < u.size(); ++i)
      CHECK(std::abs(w(i) - (psi(phi(i), p) - u(i))) <= 1e-15);
  }
  SUBCASE("example 1 parameters") {
    const Params p = example1_params();
    const Vector phi = random_field(rng, 300, 0.3);
    const Vector u = random_field(rng, 300, 15.0);
    const Vector w = residual_w(u, phi, classify(phi, p), p);
    for (Index i = 0; i < u.size(); ++i)
      CHECK(std::abs(w(i) - (psi(phi(i), p) - u(i))) <= 1e-14);
  }
  SUBCASE("gamma = 0") {
    Params p = example2_params();
    p.gamma = 0.0;
    const Vector phi = random_field(rng, 300, 0.3);
    const Vector u = random_field(rng, 300, 2.0);
    const Vector w = residual_w(u, phi, classify(phi, p), p);
    for (Index i = 0; i < u.size(); ++i)
      CHECK(std::abs(w(i) - (psi(phi(i), p) - u(i))) <= 1e-15);
  }
}

TEST_CASE("residual_w at a fixed point and on the dead zone") {
  const Params p = example2_params();
  std::mt19937_64 rng(73);
  const Vector phi = random_field(rng, 100, 0.4);
  Vector u(100);
  for (Index i = 0; i < 100; ++i) u(i) = psi(phi(i), p);
  const SetPartition part = classify(phi, p);
  CHECK(residual_w(u, phi, part, p).lpNorm<Eigen::Infinity>() <= 1e-15);

  Vector phi0 = Vector::Zero(1), u0 = Vector::Constant(1, 0.3);
  const Vector w = residual_w(u0, phi0, classify(phi0, p), p);
  CHECK(w(0) == -0.3);
}

TEST_CASE("residual_w rejects active infinite bounds") {
  Params p = example2_params();
  p.gamma = 0.0;
  p.beta = std::numeric_limits<Scalar>::infinity();
  SetPartition part;
  part.label = {SetLabel::A_beta};
  part.active = BoolArray::Constant(1, true);
  part.inactive = BoolArray::Constant(1, false);
  CHECK_THROWS_AS(residual_w(Vector::Zero(1), Vector::Zero(1), part, p), ModelError);
}

TEST_CASE("hessian_apply basics and symmetry") {
  const Example ex = example2();
  const PdeContext ctx = make_context(build_box_mesh(3, 4), ex.problem);
  const Vector u = eval_nodal(ctx.mesh, ex.problem.y_d);
  const Vector y = solve_state(ctx, u, Vector::Zero(ctx.ops.n_nodes)).y;
  const Vector phi = solve_adjoint(ctx, y);
  const BoolArray all = BoolArray::Constant(ctx.ops.n_nodes, true);

  CHECK(hessian_apply(ctx, y, phi, all, Vector::Zero(ctx.ops.n_nodes)).isZero(0.0));

  std::mt19937_64 rng(79);
  const SetPartition part = classify(phi, ex.problem.params);
  for (int probe = 0; probe < 3; ++probe) {
    const Vector v =
        part.inactive.select(random_field(rng, ctx.ops.n_nodes, 1.0), 0.0).matrix();
    const Vector w =
        part.inactive.select(random_field(rng, ctx.ops.n_nodes, 1.0), 0.0).matrix();
    const Vector av = hessian_apply(ctx, y, phi, part.inactive, v);
    const Vector aw = hessian_apply(ctx, y, phi, part.inactive, w);
    CHECK(dot_lumped(ctx, av, w) == doctest::Approx(dot_lumped(ctx, aw, v)).epsilon(1e-10));
    // result lives on the inactive set
    for (Index i = 0; i < ctx.ops.n_nodes; ++i)
      if (!part.inactive(i)) CHECK(av(i) == 0.0);
  }
}

TEST_CASE("hessian_apply is kappa times identity for flat problems") {
  const PdeContext ctx =
      make_context(build_box_mesh(2, 4), flat_problem(example2_params()));
  const Vector zero = Vector::Zero(ctx.ops.n_nodes);
  const BoolArray all = BoolArray::Constant(ctx.ops.n_nodes, true);
  std::mt19937_64 rng(83);
  const Vector v = random_field(rng, ctx.ops.n_nodes, 1.0);
  const Vector av = hessian_apply(ctx, zero, zero, all, v);
  CHECK((av - ctx.problem.params.kappa * v).lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("solve_qp on an empty inactive set") {
  const PdeContext ctx =
      make_context(build_box_mesh(2, 3), flat_problem(example2_params()));
  const Vector zero = Vector::Zero(ctx.ops.n_nodes);
  const SetPartition part = classify(zero, ctx.problem.params);  // all A_zero
  CHECK(!part.inactive.any());
  const auto qp = solve_qp(ctx, zero, zero, part, zero, SsnOptions{});
  CHECK(qp.cg_iters == 0);
  CHECK(qp.v.isZero(0.0));
}

TEST_CASE("solve_qp inverts kappa identity for flat problems") {
  const PdeContext ctx =
      make_context(build_box_mesh(2, 3), flat_problem(example2_params()));
  const Index n = ctx.ops.n_nodes;
  const Vector phi = Vector::Constant(n, 0.1);  // everything in J_minus
  const SetPartition part = classify(phi, ctx.problem.params);
  CHECK(part.inactive.all());

  std::mt19937_64 rng(89);
  const Vector b = random_field(rng, n, 1.0);
  const auto qp = solve_qp(ctx, Vector::Zero(n), phi, part, b, SsnOptions{});
  CHECK((qp.v - b / ctx.problem.params.kappa).lpNorm<Eigen::Infinity>() <= 1e-12);

  Vector off = b;
  SetPartition mixed = part;
  mixed.inactive(0) = false;
  mixed.active(0) = true;
  mixed.label[0] = SetLabel::A_zero;
  CHECK_THROWS_AS(solve_qp(ctx, Vector::Zero(n), phi, mixed, off, SsnOptions{}),
                  std::invalid_argument);
}

TEST_CASE("ssn converges in one iteration from a fixed point") {
  // Flat cost with gamma > 0: the unique solution is u = 0.
  const PdeContext ctx =
      make_context(build_box_mesh(2, 4), flat_problem(example2_params()));
  const auto result = ssn_solve(ctx, Vector::Zero(ctx.ops.n_nodes), SsnOptions{});
  CHECK(result.record.converged);
  REQUIRE(result.record.rows.size() == 2);  // one step plus the final row
  CHECK(*result.record.rows[0].delta == 0.0);
  CHECK(result.u.isZero(0.0));
  CHECK(result.record.diag.kkt_residual <= 1e-12);
}

TEST_CASE("ssn solves the small cubic example") {
  const Example ex = example2();
  const PdeContext ctx = make_context(build_box_mesh(3, 8), ex.problem);
  const Vector u0 = eval_nodal(ctx.mesh, ex.problem.y_d);
  const auto result = ssn_solve(ctx, u0, SsnOptions{});
  CHECK(result.record.converged);
  CHECK(result.record.rows.size() <= 7);
  CHECK(result.record.diag.kkt_residual <= 1e-12);
  CHECK(result.record.diag.sparsity_violation == 0.0);

  // Rows are in iteration order with nonnegative deltas; only the final row
  // omits the step size.
  for (std::size_t k = 0; k < result.record.rows.size(); ++k) {
    const auto& row = result.record.rows[k];
    CHECK(row.j == int(k));
    if (k + 1 < result.record.rows.size()) {
      REQUIRE(row.delta.has_value());
      CHECK(*row.delta >= 0.0);
    } else {
      CHECK(!row.delta.has_value());
    }
  }

  // Restarting from the solution terminates immediately.
  const auto again = ssn_solve(ctx, result.u, SsnOptions{});
  CHECK(again.record.converged);
  CHECK(again.record.rows.size() == 2);
  CHECK(norm_lumped(ctx, again.u - result.u) <= 1e-12);
}

TEST_CASE("ssn gamma = 0 branch reaches the three-set fixed point") {
  Example ex = example2();
  ex.problem.params.gamma = 0.0;
  const PdeContext ctx = make_context(build_box_mesh(3, 4), ex.problem);
  const Vector u0 = eval_nodal(ctx.mesh, ex.problem.y_d);
  const auto result = ssn_solve(ctx, u0, SsnOptions{});
  CHECK(result.record.converged);
  const Params& p = ctx.problem.params;
  for (Index i = 0; i < result.u.size(); ++i) {
    const Scalar projected =
        std::min(p.beta, std::max(p.alpha, -result.phi(i) / p.kappa));
    CHECK(std::abs(result.u(i) - projected) <= 1e-12);
  }
  CHECK(result.record.diag.measure_a_zero == 0.0);
}

TEST_CASE("ssn flags nonconvergence at max_outer") {
  const Example ex = example2();
  const PdeContext ctx = make_context(build_box_mesh(3, 4), ex.problem);
  SsnOptions opts;
  opts.max_outer = 1;
  opts.tol = 1e-300;  // unreachable => runs out of iterations
  const auto result = ssn_solve(ctx, eval_nodal(ctx.mesh, ex.problem.y_d), opts);
  CHECK(!result.record.converged);
  CHECK(result.record.rows.size() == 2);
}

TEST_CASE("diagnostics reports measures that partition the domain") {
  const Example ex = example2();
  const PdeContext ctx = make_context(build_box_mesh(3, 6), ex.problem);
  const auto result =
      ssn_solve(ctx, eval_nodal(ctx.mesh, ex.problem.y_d), SsnOptions{});
  const auto& d = result.record.diag;
  CHECK(d.measure_inactive + d.measure_a_beta + d.measure_a_alpha + d.measure_a_zero ==
        doctest::Approx(ctx.mesh.volume()).epsilon(1e-10));
  CHECK(d.lambda.size() == ctx.ops.n_nodes);
  for (Index i = 0; i < d.lambda.size(); ++i) {
    CHECK(d.lambda(i) <= 1.0);
    CHECK(d.lambda(i) >= -1.0);
  }
}
