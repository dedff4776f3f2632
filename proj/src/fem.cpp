#include "ellopt/fem.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ellopt {

Vector DiscreteOperator::restrict_interior(const Vector& full) const {
  if (full.size() != n_nodes)
    throw std::invalid_argument("restrict_interior: length mismatch");
  Vector out(n_interior());
  for (Index i = 0; i < out.size(); ++i) out(i) = full(interior_to_full[i]);
  return out;
}

Vector DiscreteOperator::embed_interior(const Vector& interior) const {
  if (interior.size() != n_interior())
    throw std::invalid_argument("embed_interior: length mismatch");
  Vector out = Vector::Zero(n_nodes);
  for (Index i = 0; i < interior.size(); ++i) out(interior_to_full[i]) = interior(i);
  return out;
}

namespace {

template <int Dim>
Eigen::Matrix<Scalar, Dim + 1, Dim + 1> element_stiffness(const Mesh& mesh, Index c,
                                                          Scalar& volume) {
  Eigen::Matrix<Scalar, Dim, Dim> edges;
  for (int k = 0; k < Dim; ++k)
    edges.col(k) =
        (mesh.nodes.row(mesh.cells(c, k + 1)) - mesh.nodes.row(mesh.cells(c, 0)))
            .transpose();
  Scalar det = edges.determinant();
  volume = det / (Dim == 2 ? 2.0 : 6.0);

  // Barycentric gradients: columns of edges^{-T} for vertices 1..Dim, and
  // minus their sum for vertex 0.
  Eigen::Matrix<Scalar, Dim, Dim + 1> grads;
  grads.template rightCols<Dim>() = edges.inverse().transpose();
  grads.col(0) = -grads.template rightCols<Dim>().rowwise().sum();

  return volume * (grads.transpose() * grads);
}

}  // namespace

DiscreteOperator assemble(const Mesh& mesh, Scalar a0) {
  if (a0 < 0) throw std::invalid_argument("assemble: a0 must be nonnegative");

  DiscreteOperator op;
  op.n_nodes = mesh.num_nodes();
  op.M = mesh.lumped_measure;

  op.full_to_interior.assign(op.n_nodes, -1);
  for (Index i = 0; i < op.n_nodes; ++i)
    if (!mesh.boundary(i)) {
      op.full_to_interior[i] = int(op.interior_to_full.size());
      op.interior_to_full.push_back(int(i));
    }
  const Index ni = op.n_interior();

  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(std::size_t(mesh.num_cells()) * (mesh.dim + 1) * (mesh.dim + 1));
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    Scalar volume = 0.0;
    Eigen::Matrix<Scalar, 4, 4> ke = Eigen::Matrix<Scalar, 4, 4>::Zero();
    if (mesh.dim == 2)
      ke.topLeftCorner<3, 3>() = element_stiffness<2>(mesh, c, volume);
    else
      ke = element_stiffness<3>(mesh, c, volume);
    if (volume < 1e-14)
      throw AssemblyError("assemble: degenerate cell " + std::to_string(c) +
                          " (volume " + std::to_string(volume) + ")");
    for (int a = 0; a <= mesh.dim; ++a) {
      const int ia = op.full_to_interior[mesh.cells(c, a)];
      if (ia < 0) continue;
      for (int b = 0; b <= mesh.dim; ++b) {
        const int ib = op.full_to_interior[mesh.cells(c, b)];
        if (ib >= 0) triplets.emplace_back(ia, ib, ke(a, b));
      }
    }
  }
  if (a0 > 0)
    for (Index i = 0; i < ni; ++i)
      triplets.emplace_back(int(i), int(i), a0 * op.M(op.interior_to_full[i]));

  op.K.resize(ni, ni);
  op.K.setFromTriplets(triplets.begin(), triplets.end());
  op.K.makeCompressed();

  op.K_diag = Vector::Zero(ni);
  for (Index i = 0; i < ni; ++i) op.K_diag(i) = op.K.coeff(i, i);

  return op;
}

Vector lumped_weighted_diagonal(const Mesh& mesh, const Vector& c) {
  if (c.size() != mesh.num_nodes())
    throw std::invalid_argument("lumped_weighted_diagonal: length mismatch");
  return mesh.lumped_measure.cwiseProduct(c);
}

Scalar integrate_nodal(const Mesh& mesh, const Vector& values) {
  if (values.size() != mesh.num_nodes())
    throw std::invalid_argument("integrate_nodal: length mismatch");
  return mesh.lumped_measure.dot(values);
}

}  // namespace ellopt
