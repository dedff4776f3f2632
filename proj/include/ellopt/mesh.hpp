#pragma once

#include <string>

#include "ellopt/types.hpp"

namespace ellopt {

/// Conforming simplicial mesh (triangles or tetrahedra) with a per-node
/// Dirichlet boundary mask and trapezoid-rule nodal weights.
///
/// Immutable after construction; safe to share read-only across threads.
struct Mesh {
  int dim = 0;                // 2 or 3
  Eigen::MatrixXd nodes;      // num_nodes x dim
  Eigen::MatrixXi cells;      // num_cells x (dim+1), positive orientation
  BoolArray boundary;         // true on Gamma
  Vector lumped_measure;      // sum over incident cells of |T|/(dim+1)

  Index num_nodes() const { return nodes.rows(); }
  Index num_cells() const { return cells.rows(); }
  Scalar volume() const { return lumped_measure.sum(); }
};

/// Signed volume of cell c in the stored vertex order.
Scalar cell_volume(const Mesh& mesh, Index c);

/// Recompute lumped_measure from nodes/cells.
void compute_lumped_measure(Mesh& mesh);

/// Uniform mesh of the unit square (2n^2 triangles, common diagonal) or the
/// unit cube (6n^3 tetrahedra, Kuhn split). Nodes at the (n+1)^dim lattice
/// points, ordered lexicographically with the x index fastest.
Mesh build_box_mesh(int dim, int n);

/// Unit-disk mesh: a hexagonal fan seed (center node plus six nodes on the
/// circle, six triangles) refined `levels` times; after each refinement new
/// boundary-edge midpoints are projected radially onto the unit circle.
Mesh build_disk_mesh(int levels);

/// Parse the ASCII mesh format (see write_mesh). Throws ParseError with the
/// offending 1-based line number.
Mesh load_mesh(const std::string& text);

/// Canonical ASCII form: `dim d`, `nodes N` + N coordinate lines,
/// `cells M` + M index lines, `boundary K` + K node indices.
/// `#` starts a comment line.
std::string write_mesh(const Mesh& mesh);

/// Sum of lumped_measure over masked nodes.
Scalar set_measure(const Mesh& mesh, const BoolArray& mask);

/// Result of one uniform red refinement. New nodes are appended after the
/// coarse nodes in sorted-edge order; parent_edges row k holds the coarse
/// endpoints of node num_coarse + k.
struct Refinement {
  Mesh mesh;
  Eigen::MatrixXi parent_edges;  // num_new x 2
  Index num_coarse = 0;
};

/// Red-refine a triangle mesh (each cell into four). With
/// project_unit_circle, new boundary nodes are moved onto |x| = 1.
Refinement red_refine(const Mesh& coarse, bool project_unit_circle = false);

/// P1 interpolation of a coarse nodal field onto the refinement:
/// injection at coarse nodes, edge-midpoint averaging at new nodes.
Vector prolong(const Refinement& refinement, const Vector& coarse_field);

}  // namespace ellopt
