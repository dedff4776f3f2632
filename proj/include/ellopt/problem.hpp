#pragma once

#include <functional>
#include <limits>
#include <string>

#include "ellopt/mesh.hpp"
#include "ellopt/types.hpp"

namespace ellopt {

/// Cost and constraint parameters of the control problem:
/// min F(u) + gamma j(u) over alpha <= u <= beta, with Tikhonov weight
/// kappa and L1 sparsity weight gamma.
struct Params {
  Scalar kappa = 1.0;
  Scalar gamma = 0.0;
  Scalar alpha = -std::numeric_limits<Scalar>::infinity();
  Scalar beta = std::numeric_limits<Scalar>::infinity();

  /// Throws std::invalid_argument when kappa <= 0, alpha >= beta, or
  /// gamma > 0 without alpha < 0 < beta.
  void validate() const;
};

/// Pointwise scalar function of position and state value; must be pure and
/// reentrant.
using PointFunction =
    std::function<Scalar(Eigen::Ref<const Eigen::RowVectorXd> x, Scalar y)>;

/// Pointwise function of position only (target fields).
using SpatialFunction = std::function<Scalar(Eigen::Ref<const Eigen::RowVectorXd> x)>;

/// Data tuple of the control problem: the monotone nonlinearity f with its
/// y-derivatives, the cost integrand L with its y-derivatives, and an
/// optional target field for initialization and reporting.
struct ProblemData {
  Params params;
  PointFunction f, f_y, f_yy;
  PointFunction L, L_y, L_yy;
  SpatialFunction y_d;  // may be empty
};

struct MeshSpec {
  enum class Kind { box2, box3, disk, file };
  Kind kind = Kind::box3;
  int n = 32;        // box subdivisions per axis
  int levels = 7;    // disk refinement levels
  std::string path;  // mesh file
};

struct Example {
  ProblemData problem;
  MeshSpec mesh;
};

/// Distributed control of -Laplace y + y^3 = u on the unit disk with
/// tracking target 3 sin(2 pi x1) sin(pi x2) e^{x1}; kappa = 0.002,
/// gamma = 0.03, bounds [-12, 12].
Example example1();

/// Distributed control of -Laplace y + |y|^3 y = u on the unit cube with
/// tracking target prod_i 8 x_i (1 - x_i); kappa = 0.1, gamma = 0.05,
/// bounds [-1, 1].
Example example2();

/// Per-node evaluation g(x_i, y_i) of a pointwise function.
Vector eval_nodal(const Mesh& mesh, const PointFunction& g, const Vector& y);

/// Per-node evaluation g(x_i) of a spatial function.
Vector eval_nodal(const Mesh& mesh, const SpatialFunction& g);

}  // namespace ellopt
