#include "ellopt/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace ellopt {

namespace {

Scalar simplex_volume(const Eigen::MatrixXd& nodes, const Eigen::MatrixXi& cells,
                      int dim, Index c) {
  if (dim == 2) {
    const auto a = nodes.row(cells(c, 0));
    const auto b = nodes.row(cells(c, 1));
    const auto d = nodes.row(cells(c, 2));
    return 0.5 * ((b(0) - a(0)) * (d(1) - a(1)) - (b(1) - a(1)) * (d(0) - a(0)));
  }
  Eigen::Matrix3d e;
  for (int k = 0; k < 3; ++k)
    e.col(k) = (nodes.row(cells(c, k + 1)) - nodes.row(cells(c, 0))).transpose();
  return e.determinant() / 6.0;
}

}  // namespace

Scalar cell_volume(const Mesh& mesh, Index c) {
  return simplex_volume(mesh.nodes, mesh.cells, mesh.dim, c);
}

void compute_lumped_measure(Mesh& mesh) {
  mesh.lumped_measure = Vector::Zero(mesh.num_nodes());
  const Scalar share = 1.0 / (mesh.dim + 1);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const Scalar w = cell_volume(mesh, c) * share;
    for (int k = 0; k <= mesh.dim; ++k) mesh.lumped_measure(mesh.cells(c, k)) += w;
  }
}

Mesh build_box_mesh(int dim, int n) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("build_box_mesh: dim must be 2 or 3");
  if (n < 1) throw std::invalid_argument("build_box_mesh: n must be >= 1");

  Mesh mesh;
  mesh.dim = dim;
  const int np = n + 1;
  const Scalar h = 1.0 / n;

  if (dim == 2) {
    mesh.nodes.resize(Index(np) * np, 2);
    mesh.boundary.resize(Index(np) * np);
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i) {
        const Index id = Index(j) * np + i;
        mesh.nodes(id, 0) = i * h;
        mesh.nodes(id, 1) = j * h;
        mesh.boundary(id) = (i == 0 || i == n || j == 0 || j == n);
      }
    mesh.cells.resize(Index(2) * n * n, 3);
    Index c = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int a = j * np + i;
        const int b = a + 1;
        const int d = a + np + 1;
        const int e = a + np;
        // both triangles share the (a, d) diagonal
        mesh.cells.row(c++) << a, b, d;
        mesh.cells.row(c++) << a, d, e;
      }
  } else {
    const Index npp = Index(np) * np;
    mesh.nodes.resize(npp * np, 3);
    mesh.boundary.resize(npp * np);
    for (int k = 0; k < np; ++k)
      for (int j = 0; j < np; ++j)
        for (int i = 0; i < np; ++i) {
          const Index id = Index(k) * npp + Index(j) * np + i;
          mesh.nodes(id, 0) = i * h;
          mesh.nodes(id, 1) = j * h;
          mesh.nodes(id, 2) = k * h;
          mesh.boundary(id) =
              (i == 0 || i == n || j == 0 || j == n || k == 0 || k == n);
        }
    // Kuhn split: one tetrahedron per permutation of the axes, all sharing
    // the main diagonal of the cube.
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    mesh.cells.resize(Index(6) * n * n * n, 4);
    Index c = 0;
    const auto node_id = [&](int i, int j, int k) {
      return int(Index(k) * npp + Index(j) * np + i);
    };
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          for (const auto& p : perms) {
            std::array<int, 3> corner = {i, j, k};
            std::array<int, 4> tet;
            tet[0] = node_id(corner[0], corner[1], corner[2]);
            for (int s = 0; s < 3; ++s) {
              corner[p[s]] += 1;
              tet[s + 1] = node_id(corner[0], corner[1], corner[2]);
            }
            mesh.cells.row(c) << tet[0], tet[1], tet[2], tet[3];
            if (simplex_volume(mesh.nodes, mesh.cells, 3, c) < 0)
              std::swap(mesh.cells(c, 2), mesh.cells(c, 3));
            ++c;
          }
  }

  compute_lumped_measure(mesh);
  return mesh;
}

Mesh build_disk_mesh(int levels) {
  if (levels < 0) throw std::invalid_argument("build_disk_mesh: levels must be >= 0");

  // Coarse seed: regular hexagon inscribed in the unit circle, fanned from
  // the center. All six outer nodes lie exactly on |x| = 1.
  Mesh mesh;
  mesh.dim = 2;
  mesh.nodes.resize(7, 2);
  mesh.nodes.row(0) << 0.0, 0.0;
  const Scalar s = std::sqrt(3.0) / 2.0;
  mesh.nodes.row(1) << 1.0, 0.0;
  mesh.nodes.row(2) << 0.5, s;
  mesh.nodes.row(3) << -0.5, s;
  mesh.nodes.row(4) << -1.0, 0.0;
  mesh.nodes.row(5) << -0.5, -s;
  mesh.nodes.row(6) << 0.5, -s;
  mesh.cells.resize(6, 3);
  for (int k = 0; k < 6; ++k) {
    const int next = k == 5 ? 1 : k + 2;
    mesh.cells.row(k) << 0, k + 1, next;
  }
  mesh.boundary.resize(7);
  mesh.boundary << false, true, true, true, true, true, true;
  compute_lumped_measure(mesh);

  for (int l = 0; l < levels; ++l) mesh = red_refine(mesh, true).mesh;
  return mesh;
}

Refinement red_refine(const Mesh& coarse, bool project_unit_circle) {
  if (coarse.dim != 2)
    throw std::invalid_argument("red_refine: only triangle meshes are supported");

  const Index nc = coarse.num_nodes();
  // Undirected edges with incidence counts; sorted order fixes the new
  // node numbering.
  std::map<std::pair<int, int>, int> edge_count;
  for (Index c = 0; c < coarse.num_cells(); ++c)
    for (int e = 0; e < 3; ++e) {
      int a = coarse.cells(c, e);
      int b = coarse.cells(c, (e + 1) % 3);
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }

  std::map<std::pair<int, int>, int> edge_id;
  Refinement ref;
  ref.num_coarse = nc;
  ref.parent_edges.resize(Index(edge_count.size()), 2);
  {
    int next = int(nc);
    for (const auto& [edge, count] : edge_count) {
      edge_id[edge] = next;
      ref.parent_edges(next - nc, 0) = edge.first;
      ref.parent_edges(next - nc, 1) = edge.second;
      ++next;
    }
  }

  Mesh& fine = ref.mesh;
  fine.dim = 2;
  fine.nodes.resize(nc + Index(edge_count.size()), 2);
  fine.nodes.topRows(nc) = coarse.nodes;
  fine.boundary.resize(fine.nodes.rows());
  fine.boundary.head(nc) = coarse.boundary;
  for (const auto& [edge, id] : edge_id) {
    fine.nodes.row(id) =
        0.5 * (coarse.nodes.row(edge.first) + coarse.nodes.row(edge.second));
    const bool on_gamma = edge_count[edge] == 1;
    fine.boundary(id) = on_gamma;
    if (on_gamma && project_unit_circle)
      fine.nodes.row(id) /= fine.nodes.row(id).norm();
  }

  fine.cells.resize(4 * coarse.num_cells(), 3);
  for (Index c = 0; c < coarse.num_cells(); ++c) {
    const int a = coarse.cells(c, 0);
    const int b = coarse.cells(c, 1);
    const int d = coarse.cells(c, 2);
    const auto mid = [&](int u, int v) {
      return edge_id.at({std::min(u, v), std::max(u, v)});
    };
    const int mab = mid(a, b), mbd = mid(b, d), mda = mid(d, a);
    fine.cells.row(4 * c + 0) << a, mab, mda;
    fine.cells.row(4 * c + 1) << mab, b, mbd;
    fine.cells.row(4 * c + 2) << mda, mbd, d;
    fine.cells.row(4 * c + 3) << mab, mbd, mda;
  }

  compute_lumped_measure(fine);
  return ref;
}

Vector prolong(const Refinement& refinement, const Vector& coarse_field) {
  if (coarse_field.size() != refinement.num_coarse)
    throw std::invalid_argument("prolong: field length does not match coarse mesh");
  Vector fine(refinement.mesh.num_nodes());
  fine.head(refinement.num_coarse) = coarse_field;
  for (Index k = 0; k < refinement.parent_edges.rows(); ++k)
    fine(refinement.num_coarse + k) =
        0.5 * (coarse_field(refinement.parent_edges(k, 0)) +
               coarse_field(refinement.parent_edges(k, 1)));
  return fine;
}

Scalar set_measure(const Mesh& mesh, const BoolArray& mask) {
  if (mask.size() != mesh.num_nodes())
    throw std::invalid_argument("set_measure: mask length does not match node count");
  Scalar total = 0.0;
  for (Index i = 0; i < mask.size(); ++i)
    if (mask(i)) total += mesh.lumped_measure(i);
  return total;
}

namespace {

// Line-based tokenizer that tracks 1-based line numbers and skips blank
// and '#' lines.
class MeshReader {
 public:
  explicit MeshReader(const std::string& text) : in_(text) {}

  bool next_line(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      tokens.assign(std::istream_iterator<std::string>(ls),
                    std::istream_iterator<std::string>());
      if (!tokens.empty()) return true;
    }
    return false;
  }

  int line() const { return line_; }

 private:
  std::istringstream in_;
  int line_ = 0;
};

long parse_count(const MeshReader& r, const std::string& tok) {
  try {
    size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(r.line(), "expected a nonnegative count, got '" + tok + "'");
  }
}

Scalar parse_real(const MeshReader& r, const std::string& tok) {
  try {
    size_t pos = 0;
    const Scalar v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(r.line(), "expected a real number, got '" + tok + "'");
  }
}

}  // namespace

Mesh load_mesh(const std::string& text) {
  MeshReader reader(text);
  std::vector<std::string> tok;

  const auto expect = [&](const std::string& keyword) {
    if (!reader.next_line(tok) || tok.size() != 2 || tok[0] != keyword)
      throw ParseError(reader.line(), "expected '" + keyword + " <count>'");
    return parse_count(reader, tok[1]);
  };

  Mesh mesh;
  mesh.dim = int(expect("dim"));
  if (mesh.dim != 2 && mesh.dim != 3)
    throw ParseError(reader.line(), "dim must be 2 or 3");

  const long n_nodes = expect("nodes");
  mesh.nodes.resize(n_nodes, mesh.dim);
  for (long i = 0; i < n_nodes; ++i) {
    if (!reader.next_line(tok) || long(tok.size()) != mesh.dim)
      throw ParseError(reader.line(), "expected " + std::to_string(mesh.dim) +
                                          " coordinates for node " + std::to_string(i));
    for (int d = 0; d < mesh.dim; ++d) mesh.nodes(i, d) = parse_real(reader, tok[d]);
  }

  const long n_cells = expect("cells");
  mesh.cells.resize(n_cells, mesh.dim + 1);
  for (long c = 0; c < n_cells; ++c) {
    if (!reader.next_line(tok) || long(tok.size()) != mesh.dim + 1)
      throw ParseError(reader.line(), "expected " + std::to_string(mesh.dim + 1) +
                                          " node indices for cell " + std::to_string(c));
    for (int k = 0; k <= mesh.dim; ++k) {
      const long id = parse_count(reader, tok[k]);
      if (id >= n_nodes)
        throw ParseError(reader.line(), "node index " + std::to_string(id) +
                                            " out of range (mesh has " +
                                            std::to_string(n_nodes) + " nodes)");
      mesh.cells(c, k) = int(id);
    }
    if (simplex_volume(mesh.nodes, mesh.cells, mesh.dim, c) <= 0.0)
      throw ParseError(reader.line(),
                       "cell " + std::to_string(c) + " is inverted or degenerate");
  }

  const long n_boundary = expect("boundary");
  mesh.boundary = BoolArray::Constant(n_nodes, false);
  for (long k = 0; k < n_boundary; ++k) {
    if (!reader.next_line(tok) || tok.size() != 1)
      throw ParseError(reader.line(), "expected one boundary node index per line");
    const long id = parse_count(reader, tok[0]);
    if (id >= n_nodes)
      throw ParseError(reader.line(),
                       "boundary node index " + std::to_string(id) + " out of range");
    mesh.boundary(id) = true;
  }
  if (reader.next_line(tok))
    throw ParseError(reader.line(), "unexpected trailing content");

  compute_lumped_measure(mesh);
  return mesh;
}

std::string write_mesh(const Mesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  out << "dim " << mesh.dim << "\n";
  out << "nodes " << mesh.num_nodes() << "\n";
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    for (int d = 0; d < mesh.dim; ++d) out << (d ? " " : "") << mesh.nodes(i, d);
    out << "\n";
  }
  out << "cells " << mesh.num_cells() << "\n";
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    for (int k = 0; k <= mesh.dim; ++k) out << (k ? " " : "") << mesh.cells(c, k);
    out << "\n";
  }
  Index n_boundary = 0;
  for (Index i = 0; i < mesh.num_nodes(); ++i) n_boundary += mesh.boundary(i);
  out << "boundary " << n_boundary << "\n";
  for (Index i = 0; i < mesh.num_nodes(); ++i)
    if (mesh.boundary(i)) out << i << "\n";
  return out.str();
}

}  // namespace ellopt
