#include "ellopt/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <vector>

namespace ellopt {

namespace {

std::string fmt(const char* spec, Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Scalar parse_real_value(int line, const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const Scalar v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, key + ": expected a real number, got '" + value + "'");
  }
}

int parse_int_value(int line, const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size() || v < std::numeric_limits<int>::min() ||
        v > std::numeric_limits<int>::max())
      throw std::invalid_argument(value);
    return int(v);
  } catch (const std::exception&) {
    throw ParseError(line, key + ": expected an integer, got '" + value + "'");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  int line = 0;

  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;

    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError(line, "expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError(line, "expected 'key = value', got '" + stripped + "'");

    const auto positive_real = [&](const char* what) {
      const Scalar v = parse_real_value(line, key, value);
      if (!(v > 0)) throw ParseError(line, std::string(what) + " must be positive");
      return v;
    };
    const auto positive_int = [&](const char* what) {
      const int v = parse_int_value(line, key, value);
      if (v <= 0) throw ParseError(line, std::string(what) + " must be positive");
      return v;
    };

    if (key == "example") {
      if (value == "custom")
        config.example = 0;
      else {
        config.example = parse_int_value(line, key, value);
        if (config.example != 1 && config.example != 2)
          throw ParseError(line, "example must be 1, 2 or custom");
      }
    } else if (key == "mesh.kind") {
      if (value == "box2")
        config.mesh_kind = MeshSpec::Kind::box2;
      else if (value == "box3")
        config.mesh_kind = MeshSpec::Kind::box3;
      else if (value == "disk")
        config.mesh_kind = MeshSpec::Kind::disk;
      else if (value == "file")
        config.mesh_kind = MeshSpec::Kind::file;
      else
        throw ParseError(line, "mesh.kind must be box2, box3, disk or file");
    } else if (key == "mesh.n") {
      config.mesh_n = positive_int("mesh.n");
    } else if (key == "mesh.levels") {
      const int v = parse_int_value(line, key, value);
      if (v < 0) throw ParseError(line, "mesh.levels must be nonnegative");
      config.mesh_levels = v;
    } else if (key == "mesh.path") {
      config.mesh_path = value;
    } else if (key == "kappa") {
      config.kappa = parse_real_value(line, key, value);
    } else if (key == "gamma") {
      config.gamma = parse_real_value(line, key, value);
    } else if (key == "alpha") {
      config.alpha = parse_real_value(line, key, value);
    } else if (key == "beta") {
      config.beta = parse_real_value(line, key, value);
    } else if (key == "ssn.tol") {
      config.ssn.tol = positive_real("ssn.tol");
    } else if (key == "ssn.max_outer") {
      config.ssn.max_outer = positive_int("ssn.max_outer");
    } else if (key == "ssn.cg_tol") {
      config.ssn.cg_tol = positive_real("ssn.cg_tol");
    } else if (key == "ssn.cg_max") {
      config.ssn.cg_max = positive_int("ssn.cg_max");
    } else if (key == "ssn.sigma_eps") {
      config.ssn.sigma_eps = positive_real("ssn.sigma_eps");
    } else if (key == "init") {
      if (value == "zero")
        config.init = RunConfig::Init::zero;
      else if (value == "y_d")
        config.init = RunConfig::Init::y_d;
      else if (value == "coarse_prolong")
        config.init = RunConfig::Init::coarse_prolong;
      else if (value == "file")
        config.init = RunConfig::Init::file;
      else
        throw ParseError(line, "init must be zero, y_d, coarse_prolong or file");
    } else if (key == "init.path") {
      config.init_path = value;
    } else if (key == "output_dir") {
      config.output_dir = value;
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }
  return config;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "example = " << (c.example == 0 ? std::string("custom") : std::to_string(c.example))
      << "\n";
  if (c.mesh_kind) {
    const char* kind = nullptr;
    switch (*c.mesh_kind) {
      case MeshSpec::Kind::box2: kind = "box2"; break;
      case MeshSpec::Kind::box3: kind = "box3"; break;
      case MeshSpec::Kind::disk: kind = "disk"; break;
      case MeshSpec::Kind::file: kind = "file"; break;
    }
    out << "mesh.kind = " << kind << "\n";
  }
  if (c.mesh_n) out << "mesh.n = " << *c.mesh_n << "\n";
  if (c.mesh_levels) out << "mesh.levels = " << *c.mesh_levels << "\n";
  if (!c.mesh_path.empty()) out << "mesh.path = " << c.mesh_path << "\n";
  if (c.kappa) out << "kappa = " << fmt("%.17g", *c.kappa) << "\n";
  if (c.gamma) out << "gamma = " << fmt("%.17g", *c.gamma) << "\n";
  if (c.alpha) out << "alpha = " << fmt("%.17g", *c.alpha) << "\n";
  if (c.beta) out << "beta = " << fmt("%.17g", *c.beta) << "\n";
  out << "ssn.tol = " << fmt("%.17g", c.ssn.tol) << "\n";
  out << "ssn.max_outer = " << c.ssn.max_outer << "\n";
  out << "ssn.cg_tol = " << fmt("%.17g", c.ssn.cg_tol) << "\n";
  out << "ssn.cg_max = " << c.ssn.cg_max << "\n";
  out << "ssn.sigma_eps = " << fmt("%.17g", c.ssn.sigma_eps) << "\n";
  if (c.init) {
    const char* init = nullptr;
    switch (*c.init) {
      case RunConfig::Init::zero: init = "zero"; break;
      case RunConfig::Init::y_d: init = "y_d"; break;
      case RunConfig::Init::coarse_prolong: init = "coarse_prolong"; break;
      case RunConfig::Init::file: init = "file"; break;
    }
    out << "init = " << init << "\n";
  }
  if (!c.init_path.empty()) out << "init.path = " << c.init_path << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  return out.str();
}

void write_vtk(std::ostream& out, const Mesh& mesh, const Vector& u, const Vector& y,
               const Vector& phi, const Vector& lambda, const SetPartition& part) {
  const Index n = mesh.num_nodes();
  out << "# vtk DataFile Version 3.0\n";
  out << "ellopt fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (Index i = 0; i < n; ++i) {
    out << fmt("%.17g", mesh.nodes(i, 0)) << " " << fmt("%.17g", mesh.nodes(i, 1)) << " "
        << (mesh.dim == 3 ? fmt("%.17g", mesh.nodes(i, 2)) : std::string("0")) << "\n";
  }
  const Index m = mesh.num_cells();
  out << "CELLS " << m << " " << m * (mesh.dim + 2) << "\n";
  for (Index c = 0; c < m; ++c) {
    out << (mesh.dim + 1);
    for (int k = 0; k <= mesh.dim; ++k) out << " " << mesh.cells(c, k);
    out << "\n";
  }
  out << "CELL_TYPES " << m << "\n";
  for (Index c = 0; c < m; ++c) out << (mesh.dim == 2 ? 5 : 10) << "\n";

  out << "POINT_DATA " << n << "\n";
  const auto scalar_field = [&](const char* name, const Vector& v) {
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (Index i = 0; i < n; ++i) out << fmt("%.17g", v(i)) << "\n";
  };
  scalar_field("u", u);
  scalar_field("y", y);
  scalar_field("phi", phi);
  scalar_field("lambda", lambda);
  out << "SCALARS set_label int 1\n";
  out << "LOOKUP_TABLE default\n";
  for (Index i = 0; i < n; ++i) {
    const SetLabel l = part.label[std::size_t(i)];
    out << (l == SetLabel::J ? 1 : int(l)) << "\n";
  }
}

namespace {

struct ResolvedSetup {
  ProblemData problem;
  MeshSpec mesh_spec;
  RunConfig::Init init;
};

ResolvedSetup resolve_setup(const RunConfig& config, const ProblemData* custom) {
  ResolvedSetup setup;
  if (config.example == 1) {
    const Example ex = example1();
    setup.problem = ex.problem;
    setup.mesh_spec = ex.mesh;
    setup.init = RunConfig::Init::coarse_prolong;
  } else if (config.example == 2) {
    const Example ex = example2();
    setup.problem = ex.problem;
    setup.mesh_spec = ex.mesh;
    setup.init = RunConfig::Init::y_d;
  } else {
    if (!custom)
      throw std::invalid_argument("example = custom requires a programmatic problem");
    setup.problem = *custom;
    if (!config.mesh_kind)
      throw std::invalid_argument("a custom problem requires mesh.kind");
    setup.init = RunConfig::Init::zero;
  }

  if (config.mesh_kind) setup.mesh_spec.kind = *config.mesh_kind;
  if (config.mesh_n) setup.mesh_spec.n = *config.mesh_n;
  if (config.mesh_levels) setup.mesh_spec.levels = *config.mesh_levels;
  if (!config.mesh_path.empty()) setup.mesh_spec.path = config.mesh_path;
  if (config.init) setup.init = *config.init;

  auto& p = setup.problem.params;
  if (config.kappa) p.kappa = *config.kappa;
  if (config.gamma) p.gamma = *config.gamma;
  if (config.alpha) p.alpha = *config.alpha;
  if (config.beta) p.beta = *config.beta;
  p.validate();

  const auto kind = setup.mesh_spec.kind;
  if (config.example == 1 && kind != MeshSpec::Kind::disk && kind != MeshSpec::Kind::file)
    throw std::invalid_argument("example 1 is posed on the unit disk; mesh.kind "
                                "must be disk or file");
  if (config.example == 2 && kind != MeshSpec::Kind::box3 && kind != MeshSpec::Kind::file)
    throw std::invalid_argument("example 2 is posed on the unit cube; mesh.kind "
                                "must be box3 or file");
  return setup;
}

Mesh build_mesh(const MeshSpec& spec) {
  switch (spec.kind) {
    case MeshSpec::Kind::box2:
      return build_box_mesh(2, spec.n);
    case MeshSpec::Kind::box3:
      return build_box_mesh(3, spec.n);
    case MeshSpec::Kind::disk:
      return build_disk_mesh(spec.levels);
    case MeshSpec::Kind::file: {
      std::ifstream in(spec.path);
      if (!in) throw std::invalid_argument("cannot open mesh file " + spec.path);
      std::ostringstream text;
      text << in.rdbuf();
      return load_mesh(text.str());
    }
  }
  throw std::invalid_argument("unreachable mesh kind");
}

Vector initial_control(const PdeContext& ctx, RunConfig::Init init,
                       const std::string& init_path) {
  switch (init) {
    case RunConfig::Init::zero:
      return Vector::Zero(ctx.ops.n_nodes);
    case RunConfig::Init::y_d:
      if (!ctx.problem.y_d)
        throw std::invalid_argument("init = y_d requires a problem target field");
      return eval_nodal(ctx.mesh, ctx.problem.y_d);
    case RunConfig::Init::file: {
      std::ifstream in(init_path);
      if (!in) throw std::invalid_argument("cannot open init file " + init_path);
      std::vector<Scalar> values;
      Scalar v;
      while (in >> v) values.push_back(v);
      if (Index(values.size()) != ctx.ops.n_nodes)
        throw std::invalid_argument("init file has " + std::to_string(values.size()) +
                                    " values, mesh has " +
                                    std::to_string(ctx.ops.n_nodes) + " nodes");
      return Eigen::Map<const Vector>(values.data(), Index(values.size()));
    }
    case RunConfig::Init::coarse_prolong:
      throw std::invalid_argument("coarse_prolong is resolved by the caller");
  }
  throw std::invalid_argument("unreachable init kind");
}

// Nested initialization: solve the problem on a chain of coarser meshes and
// prolong each solution one level up; the reported run starts from the
// solution one level below the target, as in the reference experiments.
struct ChainResult {
  PdeContext ctx;
  SsnResult result;
};

ChainResult solve_with_coarse_chain(const ResolvedSetup& setup, const SsnOptions& opts,
                                    std::ostream& log) {
  const MeshSpec& spec = setup.mesh_spec;
  std::vector<int> sizes;  // levels (disk) or n (box2), coarse to fine
  if (spec.kind == MeshSpec::Kind::disk) {
    if (spec.levels < 1)
      throw std::invalid_argument("coarse_prolong requires mesh.levels >= 1");
    const int base = std::min(spec.levels - 1, 3);
    for (int l = base; l <= spec.levels; ++l) sizes.push_back(l);
  } else if (spec.kind == MeshSpec::Kind::box2) {
    if (spec.n % 2 != 0 || spec.n < 2)
      throw std::invalid_argument("coarse_prolong requires an even mesh.n");
    std::vector<int> chain{spec.n};
    while (chain.back() > 8 && chain.back() % 2 == 0) chain.push_back(chain.back() / 2);
    sizes.assign(chain.rbegin(), chain.rend());
  } else {
    throw std::invalid_argument("coarse_prolong supports disk and box2 meshes only");
  }

  const bool disk = spec.kind == MeshSpec::Kind::disk;
  Mesh mesh = disk ? build_disk_mesh(sizes.front()) : build_box_mesh(2, sizes.front());

  ChainResult chain;
  chain.ctx = make_context(std::move(mesh), setup.problem);
  Vector u0 = initial_control(chain.ctx,
                              setup.problem.y_d ? RunConfig::Init::y_d
                                                : RunConfig::Init::zero,
                              "");
  chain.result = ssn_solve(chain.ctx, u0, opts);
  log << "# coarse level " << sizes.front() << ": J = "
      << fmt("%.17g", chain.result.record.rows.back().objective) << "\n";

  for (std::size_t k = 1; k < sizes.size(); ++k) {
    Refinement ref = red_refine(chain.ctx.mesh, disk);
    u0 = prolong(ref, chain.result.u);
    chain.ctx = make_context(std::move(ref.mesh), setup.problem);
    chain.result = ssn_solve(chain.ctx, u0, opts);
    if (k + 1 < sizes.size())
      log << "# coarse level " << sizes[k] << ": J = "
          << fmt("%.17g", chain.result.record.rows.back().objective) << "\n";
  }
  return chain;
}

void write_outputs(const std::string& output_dir, const PdeContext& ctx,
                   const SsnResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(output_dir);

  {
    std::ofstream csv(fs::path(output_dir) / "convergence.csv");
    csv << "j,J,delta,newton_iters,cg_iters\n";
    for (const auto& row : res.record.rows) {
      csv << row.j << "," << fmt("%.17g", row.objective) << ",";
      if (row.delta) csv << fmt("%.16e", *row.delta);
      csv << "," << row.newton_iters << ",";
      if (row.cg_iters) csv << *row.cg_iters;
      csv << "\n";
    }
  }

  {
    const auto& d = res.record.diag;
    const Scalar smooth = objective_smooth(ctx, res.u, res.y);
    const Scalar sparsity = ctx.problem.params.gamma *
                            integrate_nodal(ctx.mesh, res.u.cwiseAbs());
    std::ofstream diag(fs::path(output_dir) / "diagnostics.txt");
    diag << "measure_inactive = " << fmt("%.17g", d.measure_inactive) << "\n";
    diag << "measure_a_beta = " << fmt("%.17g", d.measure_a_beta) << "\n";
    diag << "measure_a_alpha = " << fmt("%.17g", d.measure_a_alpha) << "\n";
    diag << "measure_a_zero = " << fmt("%.17g", d.measure_a_zero) << "\n";
    diag << "sigma_measure = " << fmt("%.17g", d.sigma_measure) << "\n";
    diag << "kkt_residual = " << fmt("%.17g", d.kkt_residual) << "\n";
    diag << "sparsity_violation = " << fmt("%.17g", d.sparsity_violation) << "\n";
    diag << "J = " << fmt("%.17g", smooth + sparsity) << "\n";
    diag << "F = " << fmt("%.17g", smooth) << "\n";
    diag << "gamma_j = " << fmt("%.17g", sparsity) << "\n";
    diag << "converged = " << (res.record.converged ? 1 : 0) << "\n";
    diag << "outer_iterations = " << res.record.rows.size() << "\n";
  }

  {
    std::ofstream vtk(fs::path(output_dir) / "fields.vtk");
    const Vector lambda = res.record.diag.lambda.size() > 0
                              ? res.record.diag.lambda
                              : Vector::Zero(ctx.ops.n_nodes);
    write_vtk(vtk, ctx.mesh, res.u, res.y, res.phi, lambda, res.partition);
  }
}

void echo_table(std::ostream& log, const SsnRecord& record) {
  log << "   j  J(u_j)                 delta_j       #Newton  #CG\n";
  for (const auto& row : record.rows) {
    char line[160];
    if (row.delta)
      std::snprintf(line, sizeof line, "%4d  %-21.17g  %-12.3e  %7d  %3d\n", row.j,
                    row.objective, *row.delta, row.newton_iters, *row.cg_iters);
    else
      std::snprintf(line, sizeof line, "%4d  %-21.17g  %-12s  %7d\n", row.j,
                    row.objective, "", row.newton_iters);
    log << line;
  }
}

}  // namespace

int run(const RunConfig& config, const ProblemData* custom, std::ostream* log_ptr) {
  std::ostream& log = log_ptr ? *log_ptr : std::cout;
  try {
    const ResolvedSetup setup = resolve_setup(config, custom);

    PdeContext ctx;
    SsnResult result;
    if (setup.init == RunConfig::Init::coarse_prolong) {
      ChainResult chain = solve_with_coarse_chain(setup, config.ssn, log);
      ctx = std::move(chain.ctx);
      result = std::move(chain.result);
    } else {
      ctx = make_context(build_mesh(setup.mesh_spec), setup.problem);
      const Vector u0 = initial_control(ctx, setup.init, config.init_path);
      result = ssn_solve(ctx, u0, config.ssn);
    }

    echo_table(log, result.record);
    write_outputs(config.output_dir, ctx, result);

    if (!result.record.converged) {
      log << "error: no convergence within " << config.ssn.max_outer
          << " outer iterations\n";
      return 2;
    }
    return 0;
  } catch (const NonconvergenceError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const DefinitenessError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ellopt
