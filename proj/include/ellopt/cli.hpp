#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "ellopt/ssn.hpp"

namespace ellopt {

/// A configuration-driven solver run. Parsed from the line-oriented
/// `key = value` format; unknown keys are errors, missing keys take the
/// defaults below (mesh and init defaults depend on the example).
struct RunConfig {
  int example = 0;  // 1, 2, or 0 for a programmatic custom problem

  std::optional<MeshSpec::Kind> mesh_kind;
  std::optional<int> mesh_n;
  std::optional<int> mesh_levels;
  std::string mesh_path;

  std::optional<Scalar> kappa, gamma, alpha, beta;

  SsnOptions ssn;

  enum class Init { zero, y_d, coarse_prolong, file };
  std::optional<Init> init;
  std::string init_path;

  std::string output_dir = ".";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parse a config file. Throws ParseError naming the offending line.
RunConfig parse_config(const std::string& text);

/// Canonical `key = value` form; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Execute a run: build mesh and problem, solve, write convergence.csv,
/// fields.vtk and diagnostics.txt under output_dir, and echo the
/// convergence table to `log`. Returns 0 on convergence, 2 on
/// nonconvergence, 1 on configuration or model errors. A custom problem
/// (example = 0) must be supplied programmatically.
int run(const RunConfig& config, const ProblemData* custom = nullptr,
        std::ostream* log = nullptr);

/// Legacy ASCII VTK unstructured-grid writer with point data u, y, phi,
/// lambda and the integer set_label (0=A_beta, 1=J_plus, 2=A_zero,
/// 3=J_minus, 4=A_alpha; a gamma = 0 inactive set is written as 1).
void write_vtk(std::ostream& out, const Mesh& mesh, const Vector& u, const Vector& y,
               const Vector& phi, const Vector& lambda, const SetPartition& part);

}  // namespace ellopt
