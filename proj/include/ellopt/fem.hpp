#pragma once

#include <vector>

#include "ellopt/linalg.hpp"
#include "ellopt/mesh.hpp"

namespace ellopt {

/// P1 discretization of A = -Laplace + a0 with homogeneous Dirichlet
/// conditions eliminated: K acts on interior nodes only, M is the lumped
/// mass over all nodes. Immutable after assembly.
struct DiscreteOperator {
  SparseMatrix K;                     // interior x interior
  Vector K_diag;                      // diag(K), cached for Jacobi
  Vector M;                           // lumped mass, all nodes
  std::vector<int> interior_to_full;  // interior index -> node id
  std::vector<int> full_to_interior;  // node id -> interior index or -1
  Index n_nodes = 0;

  Index n_interior() const { return Index(interior_to_full.size()); }

  /// Extract the interior part of a full nodal field.
  Vector restrict_interior(const Vector& full) const;
  /// Embed an interior vector into a full field, zero on the boundary.
  Vector embed_interior(const Vector& interior) const;
};

/// Assemble K_ij = int grad(phi_i) . grad(phi_j) + a0 (lumped) over interior
/// basis functions, and the all-node lumped mass M.
DiscreteOperator assemble(const Mesh& mesh, Scalar a0);

/// diag_i = M_ii * c_i over all nodes (lumped zeroth-order coefficient).
Vector lumped_weighted_diagonal(const Mesh& mesh, const Vector& c);

/// Trapezoid-rule integral sum_i M_ii * values_i.
Scalar integrate_nodal(const Mesh& mesh, const Vector& values);

}  // namespace ellopt
