#ifndef GRF_TOOLS_CLI_HPP
#define GRF_TOOLS_CLI_HPP

// Command-line front end: coeffs, sample, variance, correlate, verify.
//
// Exit codes: 0 success or verification pass, 1 verification fail,
// 2 invalid arguments, 3 I/O failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "grf/field.hpp"

namespace grf::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int {
  exit_ok = 0,
  exit_verify_failed = 1,
  exit_usage = 2,
  exit_io = 3,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { csv, json, pgm };

struct RunConfig {
  std::string subcommand;
  int dim = 1;
  Index n = 100;
  Index nx = 64, ny = 64;
  double sigma2 = 4.0;
  double rho = 0.25;
  BoundaryKind bc = BoundaryKind::robin;
  std::string bc_name = "robin";
  std::optional<double> theta1, theta2, angle;
  bool literal_tensor = false;
  std::string at;
  std::uint64_t seed = 0;
  Index samples = 1;
  std::string method = "exact";
  Index probes = 200;
  double tol = 0.03;
  std::string radii;
  std::string out;
  OutputFormat format = OutputFormat::csv;
  std::string format_name = "csv";
  double robin_divisor = default_robin_divisor;
  std::string solver = "direct";
};

/// %.12g formatting; "C" locale conventions.
inline std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// The double closest to v printed with 12 significant digits, so JSON
/// serialization emits at most 12 digits.
inline double round12(double v) {
  if (!std::isfinite(v))
    return v;
  return std::strtod(fmt12(v).c_str(), nullptr);
}

inline std::vector<double> parse_list(const std::string& s, const std::string& flag) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("invalid " + flag + ": '" + s + "' is not a comma-separated list of numbers");
    }
  }
  if (vals.empty())
    throw UsageError("invalid " + flag + ": empty list");
  return vals;
}

/// Writes to a sibling temporary file, then renames over the target.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw IoError("cannot open '" + tmp.string() + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.close();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

inline std::string field_csv(const FieldResult& f) {
  const Mesh& m = *f.mesh;
  std::string s = m.dim() == 1 ? "x,value\n" : "x,y,value\n";
  for (Index i = 0; i < m.num_nodes(); ++i) {
    const auto x = m.node(i);
    s += fmt12(x[0]);
    s += ',';
    if (m.dim() == 2) {
      s += fmt12(x[1]);
      s += ',';
    }
    s += fmt12(f.values[i]);
    s += '\n';
  }
  return s;
}

/// Binary greyscale image, top row at y = 1.  Values map affinely onto
/// 0..255; the range is recorded in a header comment.
inline std::string field_pgm(const FieldResult& f) {
  const Mesh& m = *f.mesh;
  if (m.dim() != 2)
    throw UsageError("invalid --format: pgm output needs --dim 2");
  const auto [lo_it, hi_it] = std::minmax_element(f.values.begin(), f.values.end());
  const double lo = *lo_it, hi = *hi_it;
  const Index w = m.nx() + 1, h = m.ny() + 1;
  std::string s = "P5\n# grf " + std::string(to_string(f.kind)) + " min=" + fmt12(lo) +
                  " max=" + fmt12(hi) + "\n" + std::to_string(w) + " " +
                  std::to_string(h) + "\n255\n";
  for (Index row = 0; row < h; ++row) {
    const Index j = h - 1 - row;
    for (Index i = 0; i < w; ++i) {
      const double v = f.values[m.grid_index(i, j)];
      const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
      s += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t)));
    }
  }
  return s;
}

inline json field_json(const FieldResult& f) {
  const Mesh& m = *f.mesh;
  json j;
  j["kind"] = to_string(f.kind);
  j["dim"] = m.dim();
  j["nodes"] = m.num_nodes();
  j["sigma2"] = round12(f.sigma2);
  j["rho"] = round12(f.rho);
  j["bc"] = to_string(f.bc);
  if (f.seed)
    j["seed"] = *f.seed;
  if (f.collocation_node) {
    j["collocation"] = f.collocation_point;
    j["collocation_node"] = *f.collocation_node;
  }
  json coords = json::array(), vals = json::array();
  for (Index i = 0; i < m.num_nodes(); ++i) {
    json c = json::array();
    for (double x : m.node(i))
      c.push_back(round12(x));
    coords.push_back(std::move(c));
    vals.push_back(round12(f.values[i]));
  }
  j["coordinates"] = std::move(coords);
  j["values"] = std::move(vals);
  if (!f.standard_errors.empty()) {
    json se = json::array();
    for (double v : f.standard_errors)
      se.push_back(round12(v));
    j["standard_errors"] = std::move(se);
  }
  return j;
}

namespace detail {

inline Mesh make_mesh(const RunConfig& c) {
  return c.dim == 1 ? interval_mesh(c.n) : unit_square_mesh(c.nx, c.ny);
}

inline std::optional<AnisoTensor> make_tensor(const RunConfig& c) {
  if (!c.theta1)
    return std::nullopt;
  return AnisoTensor{*c.theta1, *c.theta2, c.angle.value_or(0.0),
                     c.literal_tensor ? TensorForm::literal : TensorForm::rotation};
}

inline PriorOperator make_prior(const RunConfig& c) {
  PriorOptions opt;
  opt.robin_divisor = c.robin_divisor;
  opt.solver = c.solver == "cg" ? SolverKind::conjugate_gradient : SolverKind::direct;
  return build_prior(make_mesh(c), c.sigma2, c.rho, c.bc, make_tensor(c), opt);
}

inline std::vector<double> domain_center(int dim) { return std::vector<double>(dim, 0.5); }

inline std::vector<double> collocation(const RunConfig& c, bool required) {
  if (c.at.empty()) {
    if (required)
      throw UsageError("missing --at: a collocation point is required");
    return domain_center(c.dim);
  }
  auto p = parse_list(c.at, "--at");
  if (static_cast<int>(p.size()) != c.dim)
    throw UsageError("invalid --at: expected " + std::to_string(c.dim) + " coordinate(s)");
  if (!inside_unit_domain(p, c.dim))
    throw UsageError("invalid --at: point lies outside the unit domain");
  return p;
}

inline void validate(const RunConfig& c, const CLI::App& sub) {
  const bool coeffs = c.subcommand == "coeffs";
  if (coeffs ? (c.dim < 1 || c.dim > 3) : (c.dim < 1 || c.dim > 2))
    throw UsageError("invalid --dim: must be " + std::string(coeffs ? "1, 2 or 3" : "1 or 2"));
  if (!(c.sigma2 > 0.0))
    throw UsageError("invalid --sigma2: must be positive");
  if (!(c.rho > 0.0))
    throw UsageError("invalid --rho: must be positive");
  if (!(c.robin_divisor > 0.0))
    throw UsageError("invalid --robin-divisor: must be positive");
  if (coeffs)
    return;
  if (c.n < 1)
    throw UsageError("invalid --n: must be at least 1");
  if (c.nx < 1 || c.ny < 1)
    throw UsageError("invalid --nx/--ny: must be at least 1");

  const bool any_theta = sub.count("--theta1") || sub.count("--theta2") ||
                         sub.count("--angle") || c.literal_tensor;
  if (any_theta) {
    if (c.dim != 2)
      throw UsageError("invalid --theta1/--theta2/--angle: anisotropy needs --dim 2");
    if (!c.theta1 || !c.theta2)
      throw UsageError("invalid anisotropy: --theta1 and --theta2 must both be given");
    if (!(*c.theta1 > 0.0))
      throw UsageError("invalid --theta1: must be positive");
    if (!(*c.theta2 > 0.0))
      throw UsageError("invalid --theta2: must be positive");
    if (c.literal_tensor) {
      try {
        aniso_tensor_matrix(*make_tensor(c));
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid --literal-tensor: ") + e.what());
      }
    }
  }
  if (c.samples < 1)
    throw UsageError("invalid --samples: must be at least 1");
  if (c.method != "exact" && c.method != "hutchinson")
    throw UsageError("invalid --method: expected exact or hutchinson");
  if (c.method == "hutchinson" && c.probes < 2)
    throw UsageError("invalid --probes: need at least 2");
  if (c.format == OutputFormat::pgm && c.dim != 2)
    throw UsageError("invalid --format: pgm output needs --dim 2");
}

class Emitter {
public:
  Emitter(const RunConfig& c, std::ostream& out) : c_(c), out_(out) {}

  void emit(const std::string& path, const std::string& content) const {
    if (path.empty()) {
      out_ << content;
      out_.flush();
    } else {
      write_atomic(path, content);
    }
  }

  void emit_field(const std::string& path, const FieldResult& f,
                  const json* summary = nullptr) const {
    switch (c_.format) {
    case OutputFormat::csv:
      emit(path, field_csv(f));
      break;
    case OutputFormat::pgm:
      emit(path, field_pgm(f));
      break;
    case OutputFormat::json: {
      json j = field_json(f);
      if (summary)
        j["summary"] = *summary;
      emit(path, j.dump(2) + "\n");
      break;
    }
    }
  }

private:
  const RunConfig& c_;
  std::ostream& out_;
};

inline std::string indexed_path(const std::string& path, Index k) {
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + std::to_string(k) + p.extension().string()))
      .string();
}

inline int cmd_coeffs(const RunConfig& c, std::ostream& out) {
  const HalfInteger nu = bilaplacian_nu(c.dim);
  const SpdeCoeffs k = coeffs_from_stats(c.sigma2, c.rho, c.dim, c.bc, c.robin_divisor);
  json j;
  j["dim"] = c.dim;
  j["sigma2"] = round12(c.sigma2);
  j["rho"] = round12(c.rho);
  j["nu"] = round12(nu.value());
  j["kappa"] = round12(kappa_from_rho(c.rho, nu));
  j["s"] = round12(k.s);
  j["gamma"] = round12(k.gamma);
  j["delta"] = round12(k.delta);
  j["beta"] = round12(k.beta);
  Emitter(c, out).emit(c.out, j.dump(2) + "\n");
  return exit_ok;
}

inline int cmd_sample(const RunConfig& c, std::ostream& out) {
  if (c.samples > 1 && c.out.empty())
    throw UsageError("invalid --samples: more than one sample needs --out");
  const PriorOperator p = make_prior(c);
  const Emitter em(c, out);
  for (Index k = 0; k < c.samples; ++k) {
    const FieldResult f = sample(p, c.seed + k);
    em.emit_field(c.samples == 1 ? c.out : indexed_path(c.out, k), f);
  }
  return exit_ok;
}

inline json variance_summary(const FieldResult& v, const std::string& method) {
  const Mesh& m = *v.mesh;
  const auto [lo, hi] = std::minmax_element(v.values.begin(), v.values.end());
  json s;
  s["kind"] = "variance";
  s["method"] = method;
  s["min"] = round12(*lo);
  s["max"] = round12(*hi);
  s["center"] = round12(v.values[nearest_node(m, domain_center(m.dim()))]);
  s["corner"] = round12(v.values[0]);
  if (!v.standard_errors.empty())
    s["max_standard_error"] =
        round12(*std::max_element(v.standard_errors.begin(), v.standard_errors.end()));
  return s;
}

inline int cmd_variance(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const PriorOperator p = make_prior(c);
  const FieldResult v = c.method == "hutchinson"
                            ? variance_field(p, VarianceMethod::hutchinson(c.probes, c.seed))
                            : variance_field(p);
  const json summary = variance_summary(v, c.method);
  const Emitter em(c, out);
  if (c.format == OutputFormat::json) {
    em.emit_field(c.out, v, &summary);
    return exit_ok;
  }
  em.emit_field(c.out, v);
  if (c.out.empty())
    err << summary.dump(2) << "\n";
  else
    write_atomic(c.out + ".json", summary.dump(2) + "\n");
  return exit_ok;
}

inline int cmd_correlate(const RunConfig& c, std::ostream& out) {
  const auto at = collocation(c, true);
  const PriorOperator p = make_prior(c);
  Emitter(c, out).emit_field(c.out, correlation_field(p, at));
  return exit_ok;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out) {
  if (c.theta1)
    throw UsageError("invalid anisotropy: verify needs an isotropic prior");
  if (!(c.tol >= 0.0))
    throw UsageError("invalid --tol: must be nonnegative");
  if (c.format == OutputFormat::pgm)
    throw UsageError("invalid --format: verify writes JSON");
  const auto at = collocation(c, false);
  std::vector<double> radii = c.radii.empty()
                                  ? std::vector<double>{0.0, 0.5 * c.rho, c.rho, 2 * c.rho, 3 * c.rho}
                                  : parse_list(c.radii, "--radii");
  for (double r : radii) {
    if (!(r >= 0.0))
      throw UsageError("invalid --radii: radii must be nonnegative");
    std::vector<double> x = at;
    x[0] += r;
    if (!inside_unit_domain(x, c.dim))
      throw UsageError("invalid --radii: radius " + fmt12(r) + " leaves the domain");
  }
  const PriorOperator p = make_prior(c);
  const auto rows = free_space_check(p, at, radii);
  double worst = 0.0;
  json table = json::array();
  for (const auto& r : rows) {
    worst = std::max(worst, r.abs_error);
    json row;
    row["radius"] = round12(r.radius);
    row["distance"] = round12(r.distance);
    row["discrete"] = round12(r.discrete);
    row["analytic"] = round12(r.analytic);
    row["abs_error"] = round12(r.abs_error);
    table.push_back(std::move(row));
  }
  const bool pass = worst <= c.tol;
  json j;
  j["dim"] = c.dim;
  j["sigma2"] = round12(c.sigma2);
  j["rho"] = round12(c.rho);
  j["bc"] = to_string(c.bc);
  j["collocation"] = at;
  j["tol"] = round12(c.tol);
  j["max_abs_error"] = round12(worst);
  j["pass"] = pass;
  j["rows"] = std::move(table);
  Emitter(c, out).emit(c.out, j.dump(2) + "\n");
  return pass ? exit_ok : exit_verify_failed;
}

inline void add_options(CLI::App& sub, RunConfig& c, bool field) {
  sub.add_option("--dim", c.dim, field ? "Spatial dimension (1 or 2)" : "Spatial dimension (1, 2 or 3)");
  sub.add_option("--sigma2", c.sigma2, "Marginal variance")->capture_default_str();
  sub.add_option("--rho", c.rho, "Correlation length")->capture_default_str();
  sub.add_option("--bc", c.bc_name, "Boundary condition")
      ->check(CLI::IsMember({"robin", "neumann"}))
      ->capture_default_str();
  sub.add_option("--robin-divisor", c.robin_divisor,
                 "Advanced: divisor in beta = sqrt(delta*gamma)/divisor")
      ->capture_default_str();
  sub.add_option("--out", c.out, "Output path (default: stdout)");
  if (!field) {
    return;
  }
  sub.add_option("--n", c.n, "Interval elements (1D)")->capture_default_str();
  sub.add_option("--nx", c.nx, "Square subdivisions along x (2D)")->capture_default_str();
  sub.add_option("--ny", c.ny, "Square subdivisions along y (2D)")->capture_default_str();
  sub.add_option("--theta1", c.theta1, "Anisotropy: principal value along the rotated x axis");
  sub.add_option("--theta2", c.theta2, "Anisotropy: principal value along the rotated y axis");
  sub.add_option("--angle", c.angle,
                 "Anisotropy: rotation angle in radians (0.7853981634 = pi/4; use "
                 "-0.7853981634 for -pi/4)");
  sub.add_flag("--literal-tensor", c.literal_tensor,
               "Expert: use the unrotated displayed-matrix tensor form (validated SPD)");
  sub.add_option("--solver", c.solver, "Linear solver")
      ->check(CLI::IsMember({"direct", "cg"}))
      ->capture_default_str();
  sub.add_option("--format", c.format_name, "Output format")
      ->check(CLI::IsMember({"csv", "json", "pgm"}))
      ->capture_default_str();
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matern-equivalent SPDE Gaussian random fields on unit meshes"};
  app.name("grf");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  RunConfig cfg;
  auto* coeffs = app.add_subcommand("coeffs", "Print operator coefficients as JSON");
  auto* samp = app.add_subcommand("sample", "Draw seeded samples");
  auto* var = app.add_subcommand("variance", "Pointwise marginal variance");
  auto* corr = app.add_subcommand("correlate", "Correlation with a collocation point");
  auto* ver = app.add_subcommand("verify", "Compare with the free-space Matern correlation");

  detail::add_options(*coeffs, cfg, false);
  for (auto* s : {samp, var, corr, ver})
    detail::add_options(*s, cfg, true);

  for (auto* s : {samp, var})
    s->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  samp->add_option("--samples", cfg.samples, "Number of samples (seeds seed..seed+N-1)")
      ->capture_default_str();
  var->add_option("--method", cfg.method, "exact or hutchinson")->capture_default_str();
  var->add_option("--probes", cfg.probes, "Hutchinson probe count")->capture_default_str();
  corr->add_option("--at", cfg.at, "Collocation point x[,y]");
  ver->add_option("--at", cfg.at, "Collocation point x[,y] (default: domain center)");
  ver->add_option("--radii", cfg.radii, "Comma-separated radii along +x (default: 0,rho/2,rho,2rho,3rho)");
  ver->add_option("--tol", cfg.tol, "Maximum allowed absolute error")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  cfg.subcommand = sub->get_name();
  cfg.bc = cfg.bc_name == "neumann" ? BoundaryKind::neumann : BoundaryKind::robin;
  cfg.format = cfg.format_name == "json"  ? OutputFormat::json
               : cfg.format_name == "pgm" ? OutputFormat::pgm
                                          : OutputFormat::csv;
  try {
    detail::validate(cfg, *sub);
    if (cfg.subcommand == "coeffs")
      return detail::cmd_coeffs(cfg, out);
    if (cfg.subcommand == "sample")
      return detail::cmd_sample(cfg, out);
    if (cfg.subcommand == "variance")
      return detail::cmd_variance(cfg, out, err);
    if (cfg.subcommand == "correlate")
      return detail::cmd_correlate(cfg, out);
    return detail::cmd_verify(cfg, out);
  } catch (const UsageError& e) {
    err << "grf " << cfg.subcommand << ": " << e.what() << "\n";
    return exit_usage;
  } catch (const IoError& e) {
    err << "grf " << cfg.subcommand << ": " << e.what() << "\n";
    return exit_io;
  } catch (const std::domain_error& e) {
    err << "grf " << cfg.subcommand << ": " << e.what() << "\n";
    return exit_usage;
  }
}

} // namespace grf::cli

#endif // GRF_TOOLS_CLI_HPP
