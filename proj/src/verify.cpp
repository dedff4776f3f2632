#include "ellopt/verify.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace ellopt {

namespace {

constexpr std::uint64_t kProbeSeed = 0x9e3779b97f4a7c15ull;

Vector random_direction(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<Scalar> dist(-1.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

Scalar relative_gap(Scalar a, Scalar b) {
  const Scalar scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

void guard_probe_inputs(const PdeContext& ctx, const Vector& u, Scalar h) {
  if (ctx.mesh.num_nodes() > 5000)
    throw std::invalid_argument("finite-difference checks are limited to meshes "
                                "of at most 5000 nodes");
  if (!(h >= 1e-7 && h <= 1e-3))
    throw std::invalid_argument("finite-difference step must lie in [1e-7, 1e-3]");
  if (u.size() != ctx.ops.n_nodes)
    throw std::invalid_argument("field length does not match the mesh");
}

FdReport finish_report(FdReport report) {
  report.max_rel_error = report.errors[2];
  report.observed_order =
      report.errors[1] > 0
          ? std::log10(report.errors[0] / report.errors[1])
          : (report.errors[0] > 0 ? std::numeric_limits<Scalar>::infinity() : 0.0);
  return report;
}

}  // namespace

FdReport check_gradient(const PdeContext& ctx, const Vector& u, int probes, Scalar h) {
  guard_probe_inputs(ctx, u, h);

  FdReport report;
  report.probes = probes;
  report.steps = {100 * h, 10 * h, h};

  const Vector y = solve_state(ctx, u, Vector::Zero(u.size())).y;
  const Vector phi = solve_adjoint(ctx, y);
  const Vector grad = phi + ctx.problem.params.kappa * u;

  std::mt19937_64 rng(kProbeSeed);
  for (int probe = 0; probe < probes; ++probe) {
    const Vector v = random_direction(rng, u.size());
    const Scalar lhs = dot_lumped(ctx, grad, v);
    for (int s = 0; s < 3; ++s) {
      const Scalar step = report.steps[std::size_t(s)];
      const Vector y_plus = solve_state(ctx, u + step * v, y).y;
      const Vector y_minus = solve_state(ctx, u - step * v, y).y;
      const Scalar rhs = (objective_smooth(ctx, u + step * v, y_plus) -
                          objective_smooth(ctx, u - step * v, y_minus)) /
                         (2 * step);
      report.errors[std::size_t(s)] =
          std::max(report.errors[std::size_t(s)], relative_gap(lhs, rhs));
    }
  }
  return finish_report(report);
}

FdReport check_hessian(const PdeContext& ctx, const Vector& u, int probes, Scalar h) {
  guard_probe_inputs(ctx, u, h);

  FdReport report;
  report.probes = probes;
  report.steps = {100 * h, 10 * h, h};

  const Vector y = solve_state(ctx, u, Vector::Zero(u.size())).y;
  const Vector phi = solve_adjoint(ctx, y);
  const BoolArray all = BoolArray::Constant(u.size(), true);
  const Scalar kappa = ctx.problem.params.kappa;

  const auto gradient_at = [&](const Vector& point) -> Vector {
    const Vector ys = solve_state(ctx, point, y).y;
    return solve_adjoint(ctx, ys) + kappa * point;
  };

  std::mt19937_64 rng(kProbeSeed);
  for (int probe = 0; probe < probes; ++probe) {
    const Vector v = random_direction(rng, u.size());
    const Vector lhs = hessian_apply(ctx, y, phi, all, v);
    const Scalar lhs_norm = norm_lumped(ctx, lhs);
    for (int s = 0; s < 3; ++s) {
      const Scalar step = report.steps[std::size_t(s)];
      const Vector rhs =
          (gradient_at(u + step * v) - gradient_at(u - step * v)) / (2 * step);
      const Scalar err = norm_lumped(ctx, lhs - rhs) /
                         (lhs_norm == 0.0 ? 1.0 : lhs_norm);
      report.errors[std::size_t(s)] = std::max(report.errors[std::size_t(s)], err);
    }
  }
  return finish_report(report);
}

Vector dense_qp_oracle(const PdeContext& ctx, const Vector& y, const Vector& phi,
                       const SetPartition& part, const Vector& b, Matrix* out_matrix) {
  std::vector<Index> j_nodes;
  for (Index i = 0; i < part.size(); ++i)
    if (part.inactive(i)) j_nodes.push_back(i);
  const Index m = Index(j_nodes.size());
  if (m > 300)
    throw std::invalid_argument("dense_qp_oracle: inactive set exceeds 300 dofs");

  Matrix A(m, m);
  for (Index col = 0; col < m; ++col) {
    Vector e = Vector::Zero(part.size());
    e(j_nodes[std::size_t(col)]) = 1.0;
    const Vector column = hessian_apply(ctx, y, phi, part.inactive, e);
    for (Index row = 0; row < m; ++row) A(row, col) = column(j_nodes[std::size_t(row)]);
  }
  if (out_matrix) *out_matrix = A;

  Vector rhs(m);
  for (Index k = 0; k < m; ++k) rhs(k) = b(j_nodes[std::size_t(k)]);

  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success)
    throw DefinitenessError("dense_qp_oracle: Cholesky factorization failed",
                            Vector::Zero(part.size()));
  const Vector x = llt.solve(rhs);

  Vector full = Vector::Zero(part.size());
  for (Index k = 0; k < m; ++k) full(j_nodes[std::size_t(k)]) = x(k);
  return full;
}

}  // namespace ellopt
