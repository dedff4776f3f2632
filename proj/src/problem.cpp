#include "ellopt/problem.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ellopt {

void Params::validate() const {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (!(alpha < beta)) throw std::invalid_argument("alpha < beta violated");
  if (gamma < 0) throw std::invalid_argument("gamma must be nonnegative");
  if (gamma > 0 && !(alpha < 0 && 0 < beta))
    throw std::invalid_argument("gamma > 0 requires alpha < 0 < beta");
}

namespace {

ProblemData tracking_problem(Params params, SpatialFunction target) {
  ProblemData data;
  data.params = params;
  data.y_d = target;
  data.L = [target](Eigen::Ref<const Eigen::RowVectorXd> x, Scalar y) {
    const Scalar d = y - target(x);
    return 0.5 * d * d;
  };
  data.L_y = [target](Eigen::Ref<const Eigen::RowVectorXd> x, Scalar y) {
    return y - target(x);
  };
  data.L_yy = [](Eigen::Ref<const Eigen::RowVectorXd>, Scalar) { return 1.0; };
  return data;
}

}  // namespace

Example example1() {
  Params params;
  params.kappa = 0.002;
  params.gamma = 0.03;
  params.alpha = -12.0;
  params.beta = 12.0;

  const SpatialFunction target = [](Eigen::Ref<const Eigen::RowVectorXd> x) {
    return 3.0 * std::sin(2.0 * std::numbers::pi * x(0)) *
           std::sin(std::numbers::pi * x(1)) * std::exp(x(0));
  };

  Example ex;
  ex.problem = tracking_problem(params, target);
  ex.problem.f = [](Eigen::Ref<const Eigen::RowVectorXd>, Scalar y) { return y * y * y; };
  ex.problem.f_y = [](Eigen::Ref<const Eigen::RowVectorXd>, Scalar y) { return 3.0 * y * y; };
  ex.problem.f_yy = [](Eigen::Ref<const Eigen::RowVectorXd>, Scalar y) { return 6.0 * y; };
  ex.mesh.kind = MeshSpec::Kind::disk;
  ex.mesh.levels = 7;
  return ex;
}

Example example2() {
  Params params;
  params.kappa = 0.1;
  params.gamma = 0.05;
  params.alpha = -1.0;
  params.beta = 1.0;

  const SpatialFunction target = [](Eigen::Ref<const Eigen::RowVectorXd> x) {
    Scalar v = 1.0;
    for (Index d = 0; d < x.size(); ++d) v *= 8.0 * x(d) * (1.0 - x(d));
    return v;
  };

  Example ex;
  ex.problem = tracking_problem(params, target);
  ex.problem.f = [](Eigen::Ref<const Eigen::RowVectorXd>, Scalar y) {
    return std::abs(y) * y * y * y;
  };
  ex.problem.f_y = [](Eigen::Ref<const Eigen::RowVectorXd>, Scalar y) {
    const Scalar a = std::abs(y);
    return 4.0 * a * a * a;
  };
  ex.problem.f_yy = [](Eigen::Ref<const Eigen::RowVectorXd>, Scalar y) {
    return 12.0 * std::abs(y) * y;
  };
  ex.mesh.kind = MeshSpec::Kind::box3;
  ex.mesh.n = 32;
  return ex;
}

Vector eval_nodal(const Mesh& mesh, const PointFunction& g, const Vector& y) {
  if (y.size() != mesh.num_nodes())
    throw std::invalid_argument("eval_nodal: field length mismatch");
  Vector out(mesh.num_nodes());
  for (Index i = 0; i < out.size(); ++i) out(i) = g(mesh.nodes.row(i), y(i));
  return out;
}

Vector eval_nodal(const Mesh& mesh, const SpatialFunction& g) {
  Vector out(mesh.num_nodes());
  for (Index i = 0; i < out.size(); ++i) out(i) = g(mesh.nodes.row(i));
  return out;
}

}  // namespace ellopt
