#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "ellopt/fem.hpp"

using namespace ellopt;

namespace {

// Independent assembly oracle: full (all-node) stiffness with barycentric
// coefficients obtained by solving small Vandermonde systems, not by the
// library's inverse-transpose route.
Matrix full_stiffness_oracle(const Mesh& m, double a0) {
  const Index n = m.num_nodes();
  Matrix K = Matrix::Zero(n, n);
  const int d = m.dim;
  for (Index c = 0; c < m.num_cells(); ++c) {
    Matrix V(d + 1, d + 1);
    for (int k = 0; k <= d; ++k) {
      V(k, 0) = 1.0;
      for (int x = 0; x < d; ++x) V(k, x + 1) = m.nodes(m.cells(c, k), x);
    }
    // Row i of C holds the coefficients of lambda_i; the gradient is the
    // tail of the row.
    const Matrix C = V.fullPivLu().inverse().transpose();
    const double vol = std::abs(V.determinant()) / (d == 2 ? 2.0 : 6.0);
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j)
        K(m.cells(c, i), m.cells(c, j)) +=
            vol * C.row(i).tail(d).dot(C.row(j).tail(d));
  }
  if (a0 > 0) K += a0 * Matrix(m.lumped_measure.asDiagonal());
  return K;
}

}  // namespace

TEST_CASE("n=1 unit square has no interior dofs") {
  const Mesh m = build_box_mesh(2, 1);
  const DiscreteOperator op = assemble(m, 0.0);
  CHECK(op.K.rows() == 0);
  CHECK(op.M.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("n=2 unit square reduces to the five-point stencil center") {
  const Mesh m = build_box_mesh(2, 2);
  const DiscreteOperator op = assemble(m, 0.0);
  REQUIRE(op.K.rows() == 1);
  CHECK(op.K.coeff(0, 0) == doctest::Approx(4.0).epsilon(1e-14));

  const Matrix full = full_stiffness_oracle(m, 0.0);
  const int center = op.interior_to_full[0];
  CHECK(full(center, center) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("interior block matches the full-assembly oracle") {
  for (const Mesh& m : {build_box_mesh(2, 3), build_box_mesh(3, 2), build_disk_mesh(1)}) {
    for (double a0 : {0.0, 0.7}) {
      const DiscreteOperator op = assemble(m, a0);
      const Matrix full = full_stiffness_oracle(m, a0);
      for (Index i = 0; i < op.K.rows(); ++i)
        for (Index j = 0; j < op.K.cols(); ++j)
          CHECK(op.K.coeff(i, j) ==
                doctest::Approx(full(op.interior_to_full[std::size_t(i)],
                                     op.interior_to_full[std::size_t(j)]))
                    .epsilon(1e-12));
    }
  }
}

TEST_CASE("gradients of constants vanish in the full assembly") {
  for (const Mesh& m : {build_box_mesh(2, 3), build_box_mesh(3, 2)}) {
    const Vector ones = Vector::Ones(m.num_nodes());
    CHECK((full_stiffness_oracle(m, 0.0) * ones).lpNorm<Eigen::Infinity>() < 1e-12);
    const Vector r = full_stiffness_oracle(m, 0.5) * ones -
                     0.5 * m.lumped_measure.cwiseProduct(ones);
    CHECK(r.lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("stiffness is symmetric and positive definite on interior nodes") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const Mesh& m : {build_box_mesh(2, 4), build_box_mesh(3, 2), build_disk_mesh(2)}) {
    const DiscreteOperator op = assemble(m, 0.0);
    const Matrix dense = Matrix(op.K);
    CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() <= 1e-12);
    for (int probe = 0; probe < 10; ++probe) {
      Vector x(op.K.rows());
      for (Index i = 0; i < x.size(); ++i) x(i) = dist(rng);
      if (x.norm() == 0.0) continue;
      CHECK(x.dot(spmv(op.K, x)) > 0.0);
    }
    CHECK(op.M.minCoeff() > 0.0);
    CHECK(op.M.sum() == doctest::Approx(m.volume()).epsilon(1e-12));
  }
}

TEST_CASE("lumped weighted diagonal") {
  const Mesh m = build_box_mesh(3, 2);
  CHECK(lumped_weighted_diagonal(m, Vector::Zero(m.num_nodes())).isZero(0.0));
  CHECK((lumped_weighted_diagonal(m, Vector::Ones(m.num_nodes())) - m.lumped_measure)
            .norm() == 0.0);
  CHECK(lumped_weighted_diagonal(m, 2.0 * Vector::Ones(m.num_nodes())).sum() ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(lumped_weighted_diagonal(m, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("nodal quadrature") {
  const Mesh cube = build_box_mesh(3, 2);
  CHECK(integrate_nodal(cube, Vector::Ones(cube.num_nodes())) ==
        doctest::Approx(1.0).epsilon(1e-12));

  const Mesh square = build_box_mesh(2, 5);
  Vector x1(square.num_nodes());
  for (Index i = 0; i < x1.size(); ++i) x1(i) = square.nodes(i, 0);
  CHECK(integrate_nodal(square, x1) == doctest::Approx(0.5).epsilon(1e-12));

  Vector alternating(square.num_nodes());
  for (Index i = 0; i < alternating.size(); ++i) alternating(i) = (i % 2) ? 1.0 : -1.0;
  CHECK(integrate_nodal(square, alternating.cwiseAbs()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate_nodal(square, alternating.cwiseAbs()) >= 0.0);
  CHECK_THROWS_AS(integrate_nodal(square, Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("degenerate cells are rejected") {
  Mesh m;
  m.dim = 2;
  m.nodes.resize(3, 2);
  m.nodes << 0, 0, 1, 0, 0.5, 1e-16;
  m.cells.resize(1, 3);
  m.cells << 0, 1, 2;
  m.boundary = BoolArray::Constant(3, false);
  compute_lumped_measure(m);
  CHECK_THROWS_AS(assemble(m, 0.0), AssemblyError);
}

TEST_CASE("embedding restores zero boundary values") {
  const Mesh m = build_box_mesh(2, 4);
  const DiscreteOperator op = assemble(m, 0.0);
  const Vector inner = Vector::Ones(op.n_interior());
  const Vector full = op.embed_interior(inner);
  for (Index i = 0; i < m.num_nodes(); ++i)
    CHECK(full(i) == (m.boundary(i) ? 0.0 : 1.0));
  CHECK((op.restrict_interior(full) - inner).norm() == 0.0);
}

TEST_CASE("discrete Poisson patch test converges at second order") {
  // Reference value at the center of the unit square for -Laplace y = 1:
  // the classical double sine series.
  double reference = 0.0;
  for (int mm = 1; mm <= 501; mm += 2)
    for (int nn = 1; nn <= 501; nn += 2) {
      const double sm = (mm % 4 == 1) ? 1.0 : -1.0;
      const double sn = (nn % 4 == 1) ? 1.0 : -1.0;
      reference += sm * sn / (double(mm) * nn * (double(mm) * mm + double(nn) * nn));
    }
  reference *= 16.0 / std::pow(std::numbers::pi, 4);

  double errors[3];
  int idx = 0;
  for (int n : {8, 16, 32}) {
    const Mesh m = build_box_mesh(2, n);
    const DiscreteOperator op = assemble(m, 0.0);
    const Vector rhs = op.restrict_interior(op.M);
    const auto r = cg_solve(make_operator(op.K), rhs, 1e-13, 2000, &op.K_diag);
    REQUIRE(r.converged);
    const Vector y = op.embed_interior(r.x);
    const Index center = Index(n / 2) * (n + 1) + n / 2;
    errors[idx++] = std::abs(y(center) - reference);
  }
  CHECK(std::log2(errors[0] / errors[1]) >= 1.9);
  CHECK(std::log2(errors[1] / errors[2]) >= 1.9);
}
