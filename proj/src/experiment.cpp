#include "mixop/experiment.hpp"

#include "mixop/dirichlet_mc.hpp"
#include "mixop/eigen_mc.hpp"
#include "mixop/errors.hpp"
#include "mixop/expression.hpp"
#include "mixop/grid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#ifndef MIXOP_VERSION
#define MIXOP_VERSION "unknown"
#endif

namespace mixop {

namespace {

namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::map<std::string, std::vector<std::string>>& required_fields() {
  static const std::map<std::string, std::vector<std::string>> fields{
      {"solve", {"kernel", "domain", "f", "g", "n_paths"}},
      {"eigen", {"kernel", "domain", "n_paths"}},
      {"faber-krahn", {"kernel", "domain", "n_paths"}},
      {"survival", {"kernel", "domain", "n_paths", "t_grid"}},
      {"cross-validate", {"kernel", "domain", "f", "g", "n_paths", "h"}},
      {"validate-kernel", {"kernel", "dimension"}},
      {"narrow-domain", {"kernel", "dimension", "c_values", "widths", "h"}},
      {"symmetry", {"kernel", "domain", "h"}},
  };
  return fields;
}

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields{
      "kind",     "kernel",   "domain",     "dimension", "f",          "g",          "x0",        "points",
      "n_paths",  "dt",       "epsilon",    "t_max",     "h",          "R_max",      "p",         "seed",
      "bridge",   "small_jumps", "t_grid",  "c",         "c_values",   "widths",     "far_field", "expected",
      "rel_tol",  "expected_domain", "expected_ball", "grid_rel_tol", "identity_t", "identity_tol", "mu",
      "tolerance", "z_values", "radii", "output", "description"};
  return fields;
}

[[noreturn]] void config_error(const std::string& what) { throw ConfigError(what); }

const Json& require(const Json& spec, const std::string& key, const std::string& where) {
  if (!spec.is_object() || !spec.contains(key)) config_error("missing required field '" + where + key + "'");
  return spec.at(key);
}

double number(const Json& spec, const std::string& key, const std::string& where) {
  const Json& v = require(spec, key, where);
  if (!v.is_number()) config_error("field '" + where + key + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& spec, const std::string& key, double fallback) {
  if (!spec.contains(key)) return fallback;
  if (!spec.at(key).is_number()) config_error("field '" + key + "' must be a number");
  return spec.at(key).get<double>();
}

std::vector<double> numbers(const Json& spec, const std::string& key, const std::string& where) {
  const Json& v = require(spec, key, where);
  if (!v.is_array()) config_error("field '" + where + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) config_error("field '" + where + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Point point_from(const Json& v, const std::string& name) {
  if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxDimension)) {
    config_error("field '" + name + "' must be an array of 1 to 3 numbers");
  }
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) config_error("field '" + name + "' must be an array of numbers");
    p(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return p;
}

Point point(const Json& spec, const std::string& key, const std::string& where) {
  return point_from(require(spec, key, where), where + key);
}

Json to_json(const Point& p) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p(i));
  return a;
}

Json to_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

Json to_json(const EstimatorResult& r) {
  return Json{{"mean", r.mean},
              {"std_error", r.std_error},
              {"ci95", to_json(r.ci95)},
              {"n_effective", r.n_effective},
              {"censored", r.censored_count},
              {"censoring_bias_bound", r.censoring_bias_bound}};
}

Json to_json(const EigenEstimate& e) {
  return Json{{"lambda_hat", e.lambda_hat},
              {"std_error", e.std_error},
              {"ci95", to_json(e.ci95)},
              {"fit_window", to_json(e.fit_window)},
              {"fit_r2", e.fit_r2},
              {"n_paths", e.n_paths},
              {"censored_fraction", e.censored_fraction},
              {"window_sensitivity", e.window_sensitivity},
              {"approximants_verified", e.approximants_verified},
              {"warnings", e.warnings}};
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string regularity_label(const Domain& domain) {
  return domain.exterior_sphere_condition() ? "exterior-sphere" : "hypothesis-extended";
}

int dimension_of(const Json& config) {
  if (config.contains("domain")) return build_domain(config.at("domain")).dimension();
  const double d = number(config, "dimension", "");
  if (d != std::floor(d) || d < 1 || d > kMaxDimension) config_error("field 'dimension' must be 1, 2 or 3");
  return static_cast<int>(d);
}

/// Writes CSV files that carry the config hash and seed on their first line.
class Outputs {
 public:
  Outputs(fs::path dir, std::string stamp) : dir_(std::move(dir)), stamp_(std::move(stamp)) {}

  std::ofstream open(const std::string& name, const std::string& header) {
    fs::create_directories(dir_);
    const fs::path path = dir_ / name;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write output file " + path.string());
    os << std::setprecision(17);
    os << "# " << stamp_ << '\n' << header << '\n';
    files_.push_back(path);
    return os;
  }

  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path dir_;
  std::string stamp_;
  std::vector<fs::path> files_;
};

struct Context {
  const Json& config;
  const RunOptions& options;
  std::uint64_t seed;
  Outputs& out;
  std::ostream& log;
  Json results = Json::object();
  Json verdicts = Json::object();

  void verdict(const std::string& name, bool pass) {
    verdicts[name] = pass;
    if (!options.quiet) log << (pass ? "PASS " : "FAIL ") << name << '\n';
  }
  void note(const std::string& line) {
    if (!options.quiet) log << line << '\n';
  }
  PathConfig path() const {
    PathConfig p = build_path_config(config, options.workers);
    p.base_seed = seed;
    return p;
  }
};

std::string coordinate_header(int d) {
  std::string h;
  for (int k = 1; k <= d; ++k) h += "x" + std::to_string(k) + ",";
  return h;
}

void write_point(std::ostream& os, const Point& x) {
  for (Eigen::Index k = 0; k < x.size(); ++k) os << x(k) << ',';
}

void write_curve(Outputs& out, const std::string& name, const SurvivalCurve& curve) {
  auto os = out.open(name, "t,survival,ci_lo,ci_hi");
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    os << curve.t[i] << ',' << curve.survival[i] << ',' << curve.ci95[i].lo << ',' << curve.ci95[i].hi << '\n';
  }
}

std::vector<Point> start_points(const Json& config, const Domain& domain) {
  std::vector<Point> pts;
  if (config.contains("points")) {
    const Json& list = config.at("points");
    if (!list.is_array() || list.empty()) config_error("field 'points' must be a non-empty array of points");
    for (const Json& p : list) pts.push_back(point_from(p, "points"));
  } else if (config.contains("x0")) {
    pts.push_back(point(config, "x0", ""));
  } else {
    pts.push_back(domain.centroid());
  }
  for (const Point& p : pts) {
    if (p.size() != domain.dimension()) config_error("start point dimension does not match the domain");
    if (!contains(domain, p)) config_error("start point lies outside the domain");
  }
  return pts;
}

std::size_t path_count(const Json& config) {
  const double n = number(config, "n_paths", "");
  if (!(n >= 1) || n != std::floor(n)) config_error("field 'n_paths' must be a positive integer");
  return static_cast<std::size_t>(n);
}

AssembleOptions grid_options(const Json& config) {
  AssembleOptions o;
  if (config.contains("R_max")) o.r_max = number(config, "R_max", "");
  o.far_field = number_or(config, "far_field", 0.0);
  return o;
}

Field c_field(const Json& config, int d) {
  if (!config.contains("c")) return {};
  return build_field(config.at("c"), d, "c");
}

// ---------------------------------------------------------------- kinds

void run_solve(Context& ctx) {
  const Domain domain = build_domain(ctx.config.at("domain"));
  const int d = domain.dimension();
  const JumpKernel kernel = build_kernel(ctx.config.at("kernel"), d);
  const Field f = build_field(ctx.config.at("f"), d, "f");
  const Field g = build_field(ctx.config.at("g"), d, "g");
  const std::size_t n = path_count(ctx.config);
  const PathConfig path = ctx.path();
  const Field expected = ctx.config.contains("expected") ? build_field(ctx.config.at("expected"), d, "expected")
                                                         : Field{};
  const double rel_tol = number_or(ctx.config, "rel_tol", 0.0);
  auto os = ctx.out.open("solve.csv", coordinate_header(d) + "mean,std_error,ci_lo,ci_hi,n_effective,censored");
  Json estimates = Json::array();
  bool all = true;
  for (const Point& x : start_points(ctx.config, domain)) {
    const EstimatorResult r = solve_at(domain, f, g, x, kernel, n, path);
    write_point(os, x);
    os << r.mean << ',' << r.std_error << ',' << r.ci95.lo << ',' << r.ci95.hi << ',' << r.n_effective << ','
       << r.censored_count << '\n';
    Json entry = to_json(r);
    entry["x"] = to_json(x);
    if (expected) {
      const double want = expected(x);
      const double tol = std::max(3.0 * r.std_error + r.censoring_bias_bound, rel_tol * std::abs(want));
      const bool ok = std::abs(r.mean - want) <= tol;
      entry["expected"] = want;
      entry["pass"] = ok;
      all = all && ok;
    }
    estimates.push_back(entry);
  }
  ctx.results["estimates"] = estimates;
  ctx.results["domain_regularity"] = regularity_label(domain);
  ctx.results["epsilon"] = PathSimulator(domain, kernel, path).epsilon();
  if (expected) ctx.verdict("matches_expected", all);
}

void run_eigen(Context& ctx) {
  const Domain domain = build_domain(ctx.config.at("domain"));
  const int d = domain.dimension();
  const JumpKernel kernel = build_kernel(ctx.config.at("kernel"), d);
  EigenConfig cfg;
  cfg.path = ctx.path();
  const Point x0 = start_points(ctx.config, domain).front();
  const EigenEstimate e = estimate_lambda(domain, kernel, x0, path_count(ctx.config), cfg);
  write_curve(ctx.out, "survival.csv", e.curve);
  ctx.results["monte_carlo"] = to_json(e);
  ctx.results["domain_regularity"] = regularity_label(domain);
  const double rel_tol = number_or(ctx.config, "rel_tol", 0.05);
  if (ctx.config.contains("expected")) {
    const double want = number(ctx.config, "expected", "");
    ctx.verdict("monte_carlo_expected", std::abs(e.lambda_hat - want) <= rel_tol * want);
  }
  if (!ctx.config.contains("h")) return;
  const GridOperator op = assemble(domain, kernel, c_field(ctx.config, d), number(ctx.config, "h", ""),
                                   grid_options(ctx.config));
  const Eigenpair pair = principal_eigenpair(op);
  auto os = ctx.out.open("eigenfunction.csv", coordinate_header(d) + "psi");
  for (std::size_t i = 0; i < op.size(); ++i) {
    write_point(os, op.node(i));
    os << pair.psi.values(static_cast<Eigen::Index>(i)) << '\n';
  }
  ctx.results["grid"] = Json{{"lambda", pair.lambda},
                             {"residual", pair.residual},
                             {"iterations", pair.iterations},
                             {"perron_positive", pair.perron_positive},
                             {"value_at_centroid", pair.value_at_centroid},
                             {"nodes", op.size()},
                             {"r_max", op.r_max()}};
  ctx.verdict("perron_positive", pair.perron_positive);
  if (ctx.config.contains("expected")) {
    const double want = number(ctx.config, "expected", "");
    ctx.verdict("grid_expected", std::abs(pair.lambda - want) <= number_or(ctx.config, "grid_rel_tol", 0.01) * want);
  }
  if (ctx.config.contains("identity_t")) {
    const IdentityResult id = eigen_identity_residual(domain, kernel, pair.psi, pair.lambda,
                                                      number(ctx.config, "identity_t", ""),
                                                      path_count(ctx.config), cfg.path);
    auto is = ctx.out.open("identity.csv", coordinate_header(d) + "psi,estimate,std_error,relative_deviation");
    for (std::size_t i = 0; i < id.points.size(); ++i) {
      write_point(is, id.points[i]);
      is << id.psi[i] << ',' << id.estimates[i].mean << ',' << id.estimates[i].std_error << ','
         << id.relative_deviation[i] << '\n';
    }
    ctx.results["identity_max_relative_deviation"] = id.max_relative_deviation;
    ctx.verdict("eigen_identity", id.max_relative_deviation <= number_or(ctx.config, "identity_tol", 0.1));
  }
  if (domain.as_ball() || domain.kind() == ShapeKind::Interval) {
    const BoundaryDecayResult b = boundary_decay_check(pair.psi);
    ctx.results["boundary_decay"] =
        Json{{"eta_lower", b.eta_lower}, {"c_upper", b.c_upper}, {"exponent", b.exponent}, {"nodes", b.nodes}};
    ctx.verdict("boundary_decay", b.pass);
  }
}

void run_faber_krahn(Context& ctx) {
  const Domain domain = build_domain(ctx.config.at("domain"));
  const JumpKernel kernel = build_kernel(ctx.config.at("kernel"), domain.dimension());
  EigenConfig cfg;
  cfg.path = ctx.path();
  const FaberKrahnResult r = faber_krahn_compare(domain, kernel, path_count(ctx.config), cfg);
  write_curve(ctx.out, "survival_domain.csv", r.domain.curve);
  write_curve(ctx.out, "survival_ball.csv", r.ball.curve);
  ctx.results["lambda_D"] = to_json(r.domain);
  ctx.results["lambda_B"] = to_json(r.ball);
  ctx.results["ball"] = r.ball_shape.describe();
  ctx.results["domain_regularity"] = regularity_label(domain);
  ctx.verdict("ordering", r.verdict);
  const double rel_tol = number_or(ctx.config, "rel_tol", 0.05);
  if (ctx.config.contains("expected_domain")) {
    const double want = number(ctx.config, "expected_domain", "");
    ctx.verdict("lambda_D_expected", std::abs(r.domain.lambda_hat - want) <= rel_tol * want);
  }
  if (ctx.config.contains("expected_ball")) {
    const double want = number(ctx.config, "expected_ball", "");
    ctx.verdict("lambda_B_expected", std::abs(r.ball.lambda_hat - want) <= rel_tol * want);
  }
}

void run_survival(Context& ctx) {
  const Domain domain = build_domain(ctx.config.at("domain"));
  const JumpKernel kernel = build_kernel(ctx.config.at("kernel"), domain.dimension());
  const std::vector<double> t = numbers(ctx.config, "t_grid", "");
  const DominationResult r = survival_domination_check(domain, kernel, t, path_count(ctx.config), ctx.path());
  auto os = ctx.out.open("domination.csv", "t,survival_domain,survival_ball,joint_std_error,pass");
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    os << r.t[i] << ',' << r.survival_domain[i] << ',' << r.survival_ball[i] << ',' << r.joint_std_error[i] << ','
       << (r.pass[i] ? 1 : 0) << '\n';
  }
  ctx.results["t"] = r.t;
  ctx.results["survival_domain"] = r.survival_domain;
  ctx.results["survival_ball"] = r.survival_ball;
  ctx.verdict("survival_domination", r.verdict);
}

void run_cross_validate(Context& ctx) {
  const Domain domain = build_domain(ctx.config.at("domain"));
  const int d = domain.dimension();
  const JumpKernel kernel = build_kernel(ctx.config.at("kernel"), d);
  const Field f = build_field(ctx.config.at("f"), d, "f");
  const Field g = build_field(ctx.config.at("g"), d, "g");
  const std::size_t n = path_count(ctx.config);
  const PathConfig path = ctx.path();
  const GridOperator op = assemble(domain, kernel, {}, number(ctx.config, "h", ""), grid_options(ctx.config));
  SolveReport report;
  const GridFunction u = solve_dirichlet(op, f, g, &report);
  std::vector<Point> pts;
  if (ctx.config.contains("points")) {
    pts = start_points(ctx.config, domain);
  } else {
    const int per_axis = static_cast<int>(std::lround(std::pow(9.0, 1.0 / d)));
    pts = start_lattice(domain, per_axis, 0.0);
  }
  const double grid_tol = number_or(ctx.config, "grid_rel_tol", 0.02);
  auto os = ctx.out.open("crossval.csv", coordinate_header(d) + "grid,mc_mean,mc_std_error,allowed,pass");
  bool all = true;
  double worst = 0.0;
  for (const Point& x : pts) {
    const double grid = u.interpolate(x);
    const EstimatorResult mc = solve_at(domain, f, g, x, kernel, n, path);
    const double allowed = grid_tol * std::abs(grid) + mc.ci95.half_width() + mc.censoring_bias_bound;
    const bool ok = std::abs(grid - mc.mean) <= allowed;
    worst = std::max(worst, std::abs(grid - mc.mean) / allowed);
    all = all && ok;
    write_point(os, x);
    os << grid << ',' << mc.mean << ',' << mc.std_error << ',' << allowed << ',' << (ok ? 1 : 0) << '\n';
  }
  {
    auto gs = ctx.out.open("grid_solution.csv", coordinate_header(d) + "value");
    for (std::size_t i = 0; i < op.size(); ++i) {
      write_point(gs, op.node(i));
      gs << u.values(static_cast<Eigen::Index>(i)) << '\n';
    }
  }
  ctx.results["points"] = pts.size();
  ctx.results["worst_discrepancy_over_allowance"] = worst;
  ctx.results["grid_residual"] = report.residual;
  ctx.results["grid_nodes"] = op.size();
  ctx.verdict("grid_vs_monte_carlo", all);
  if (ctx.config.contains("identity_t")) {
    const Eigenpair pair = principal_eigenpair(op);
    const IdentityResult id = eigen_identity_residual(domain, kernel, pair.psi, pair.lambda,
                                                      number(ctx.config, "identity_t", ""), n, path);
    ctx.results["grid_lambda"] = pair.lambda;
    ctx.results["identity_max_relative_deviation"] = id.max_relative_deviation;
    ctx.verdict("eigen_identity", id.max_relative_deviation <= number_or(ctx.config, "identity_tol", 0.1));
  }
}

void run_validate_kernel(Context& ctx) {
  const int d = dimension_of(ctx.config);
  const JumpKernel kernel = build_kernel(ctx.config.at("kernel"), d);
  const IntegrabilityReport integ = levy_integrability(kernel);
  ctx.results["kernel"] = kernel.describe();
  ctx.results["integrability"] = Json{{"finite", integ.finite},
                                      {"value", integ.value},
                                      {"near_piece", integ.near_piece},
                                      {"tail_piece", integ.tail_piece},
                                      {"diagnostic", integ.diagnostic}};
  // JSON has no infinity: an everywhere-positive kernel reports "inf",
  // a kernel without a positivity ball reports null.
  Json positivity = nullptr;
  if (const auto r = kernel.positivity_radius()) positivity = std::isfinite(*r) ? Json(*r) : Json("inf");
  ctx.results["flags"] = Json{{"isotropic", kernel.isotropic()},
                              {"symmetric", kernel.symmetric()},
                              {"radially_decreasing", kernel.radially_decreasing()},
                              {"positivity_radius", positivity}};
  ctx.verdict("integrable", integ.finite);
  if (!integ.finite) return;
  if (ctx.config.contains("expected")) {
    const double want = number(ctx.config, "expected", "");
    ctx.verdict("integrability_expected",
                std::abs(integ.value - want) <= number_or(ctx.config, "rel_tol", 1e-6) * std::abs(want));
  }
  const std::vector<double> radii =
      ctx.config.contains("radii") ? numbers(ctx.config, "radii", "") : std::vector<double>{0.5, 1, 2, 4, 8, 16, 32};
  const A1Report a1 = check_A1(kernel, radii);
  ctx.results["A1"] = Json{{"im_ratio_max", a1.im_ratio_max},
                           {"radii", a1.radii},
                           {"re_inf", a1.re_inf_per_radius},
                           {"re_sup", a1.re_sup_per_radius}};
  ctx.verdict("A1", a1.pass);
  const std::vector<double> zs =
      ctx.config.contains("z_values") ? numbers(ctx.config, "z_values", "") : std::vector<double>{0.5, 1, 2, 4};
  auto os = ctx.out.open("symbol.csv", "z,re_psi,im_psi");
  for (double z : zs) {
    Point p = Point::Zero(d);
    p(0) = z;
    const auto psi = symbol(kernel, p);
    os << z << ',' << psi.real() << ',' << psi.imag() << '\n';
  }
  if (!kernel.is_zero()) {
    const double eps = ctx.config.contains("epsilon") ? number(ctx.config, "epsilon", "") : default_epsilon(kernel);
    const SmallJumpStats st = small_jump_stats(kernel, eps);
    ctx.results["small_jumps"] =
        Json{{"epsilon", st.epsilon}, {"big_rate", st.big_rate}, {"small_cov_trace", st.small_cov.trace()}};
  }
}

void run_narrow_domain(Context& ctx) {
  const int d = dimension_of(ctx.config);
  const JumpKernel kernel = build_kernel(ctx.config.at("kernel"), d);
  std::vector<double> cs = numbers(ctx.config, "c_values", "");
  std::sort(cs.begin(), cs.end());
  const std::vector<double> widths = numbers(ctx.config, "widths", "");
  const NarrowDomainScan scan = narrow_domain_scan(kernel, cs, widths, number(ctx.config, "h", ""),
                                                   grid_options(ctx.config));
  auto os = ctx.out.open("narrow.csv", "c,width,sign_ok");
  Json thresholds = Json::array();
  bool small_ok = true;
  bool monotone = true;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t k = 0; k < widths.size(); ++k) {
      os << cs[i] << ',' << widths[k] << ',' << (scan.sign_ok[i][k] ? 1 : 0) << '\n';
    }
    small_ok = small_ok && !scan.sign_ok[i].empty() && scan.sign_ok[i].front();
    thresholds.push_back(std::isfinite(scan.threshold[i]) ? Json(scan.threshold[i]) : Json(nullptr));
    if (i > 0 && scan.threshold[i] > scan.threshold[i - 1]) monotone = false;
  }
  ctx.results["c_values"] = cs;
  ctx.results["thresholds"] = thresholds;
  ctx.verdict("sign_preserved_on_narrowest_slab", small_ok);
  ctx.verdict("threshold_nonincreasing_in_c", monotone);
}

void run_symmetry(Context& ctx) {
  const Domain domain = build_domain(ctx.config.at("domain"));
  const int d = domain.dimension();
  const JumpKernel kernel = build_kernel(ctx.config.at("kernel"), d);
  const GridOperator op = assemble(domain, kernel, {}, number(ctx.config, "h", ""), grid_options(ctx.config));
  const Eigenpair pair = principal_eigenpair(op);
  const double mu = number_or(ctx.config, "mu", 2.0 * pair.lambda);
  if (!(mu > pair.lambda)) config_error("field 'mu' must exceed the principal eigenvalue for a positive branch");
  // Lu = u^3 - mu u; start from the eigenfunction at the projected amplitude.
  const Nonlinearity nl{[mu](double u) { return u * u * u - mu * u; },
                        [mu](double u) { return 3.0 * u * u - mu; }};
  const Eigen::ArrayXd psi = pair.psi.values.array();
  const double amplitude = std::sqrt((mu - pair.lambda) * psi.square().sum() / psi.pow(4).sum());
  SemilinearReport report;
  const GridFunction u = solve_semilinear(op, nl, amplitude * pair.psi.values, &report);
  const double tol = number_or(ctx.config, "tolerance", 0.02);
  const SymmetryResult sym = symmetry_check(u, tol);
  auto os = ctx.out.open("semilinear.csv", coordinate_header(d) + "value");
  for (std::size_t i = 0; i < op.size(); ++i) {
    write_point(os, op.node(i));
    os << u.values(static_cast<Eigen::Index>(i)) << '\n';
  }
  auto rs = ctx.out.open("radial_profile.csv", "r,mean");
  for (std::size_t b = 0; b < sym.bin_radius.size(); ++b) rs << sym.bin_radius[b] << ',' << sym.bin_mean[b] << '\n';
  ctx.results["lambda_h"] = pair.lambda;
  ctx.results["mu"] = mu;
  ctx.results["newton_iterations"] = report.iterations;
  ctx.results["newton_residual"] = report.residual;
  ctx.results["min_value"] = u.values.minCoeff();
  ctx.results["max_deviation"] = sym.max_deviation;
  ctx.results["strictly_decreasing"] = sym.strictly_decreasing;
  ctx.verdict("positive_solution", u.values.minCoeff() > 0.0);
  ctx.verdict("radial_and_decreasing", sym.pass);
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& [name, fields] : required_fields()) k.push_back(name);
    return k;
  }();
  return kinds;
}

const std::vector<Catalogue>& kernel_catalogue() {
  static const std::vector<Catalogue> list{
      {"zero", "", "no jumps: L is the Laplacian"},
      {"fractional", "s in (0,1)", "|y|^(-d-2s)"},
      {"truncated-fractional", "s, R", "|y|^(-d-2s) on |y| <= R"},
      {"tempered-fractional", "s, beta", "|y|^(-d-2s) exp(-beta |y|)"},
      {"compact-bump", "r0", "smooth bump supported in |y| < 2 r0, positive on |y| <= r0"},
      {"tabulated", "radii[], values[]", "radial profile, log-linear between knots"},
  };
  return list;
}

const std::vector<Catalogue>& domain_catalogue() {
  static const std::vector<Catalogue> list{
      {"ball", "center[], radius", "Euclidean ball (an interval when d = 1)"},
      {"interval", "a, b", "open interval (a, b)"},
      {"box", "lo[], hi[]", "axis-aligned box"},
      {"cube", "center[], side | volume", "axis-aligned cube"},
      {"ellipsoid", "center[], semi_axes[]", "axis-aligned ellipsoid"},
      {"polygon", "vertices[][2]", "convex polygon, counter-clockwise"},
      {"polytope", "normals[][], offsets[]", "convex polytope {x : n_i . x < b_i}"},
  };
  return list;
}

Json load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

Domain build_domain(const Json& spec) {
  const std::string w = "domain.";
  const Json& shape_v = require(spec, "shape", w);
  if (!shape_v.is_string()) config_error("field 'domain.shape' must be a string");
  const std::string shape = shape_v.get<std::string>();
  try {
    if (shape == "ball") return Domain::ball(point(spec, "center", w), number(spec, "radius", w));
    if (shape == "interval") return Domain::interval(number(spec, "a", w), number(spec, "b", w));
    if (shape == "box") {
      const Point lo = point(spec, "lo", w);
      const Point hi = point(spec, "hi", w);
      if (lo.size() != hi.size()) config_error("fields 'domain.lo' and 'domain.hi' differ in dimension");
      return Domain::box(lo, hi);
    }
    if (shape == "cube") {
      const Point c = point(spec, "center", w);
      const int d = static_cast<int>(c.size());
      const double side = spec.contains("side") ? number(spec, "side", w)
                                                : std::pow(number(spec, "volume", w), 1.0 / d);
      return Domain::box(c.array() - 0.5 * side, c.array() + 0.5 * side);
    }
    if (shape == "ellipsoid") return Domain::ellipsoid(point(spec, "center", w), point(spec, "semi_axes", w));
    if (shape == "polygon") {
      const Json& v = require(spec, "vertices", w);
      if (!v.is_array()) config_error("field 'domain.vertices' must be an array of points");
      std::vector<Point> pts;
      for (const Json& p : v) pts.push_back(point_from(p, "domain.vertices"));
      return Domain::polygon(pts);
    }
    if (shape == "polytope") {
      const Json& nv = require(spec, "normals", w);
      const std::vector<double> b = numbers(spec, "offsets", w);
      if (!nv.is_array() || nv.size() != b.size()) config_error("field 'domain.normals' must match 'domain.offsets'");
      const int d = static_cast<int>(point_from(nv.at(0), "domain.normals").size());
      Eigen::MatrixXd normals(static_cast<Eigen::Index>(b.size()), d);
      for (std::size_t i = 0; i < b.size(); ++i) {
        const Point row = point_from(nv[i], "domain.normals");
        if (row.size() != d) config_error("field 'domain.normals' rows differ in dimension");
        normals.row(static_cast<Eigen::Index>(i)) = row.transpose();
      }
      return Domain::polytope(normals, Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid domain: ") + e.what());
  }
  config_error("unknown domain shape '" + shape + "' (see list-domains)");
}

JumpKernel build_kernel(const Json& spec, int dimension) {
  const std::string w = "kernel.";
  const Json& family_v = require(spec, "family", w);
  if (!family_v.is_string()) config_error("field 'kernel.family' must be a string");
  const std::string family = family_v.get<std::string>();
  try {
    if (family == "zero") return JumpKernel::zero(dimension);
    if (family == "fractional") return JumpKernel::fractional(dimension, number(spec, "s", w));
    if (family == "truncated-fractional") {
      return JumpKernel::truncated_fractional(dimension, number(spec, "s", w), number(spec, "R", w));
    }
    if (family == "tempered-fractional") {
      return JumpKernel::tempered_fractional(dimension, number(spec, "s", w), number(spec, "beta", w));
    }
    if (family == "compact-bump") return JumpKernel::compact_bump(dimension, number(spec, "r0", w));
    if (family == "tabulated") {
      return JumpKernel::tabulated(dimension, numbers(spec, "radii", w), numbers(spec, "values", w));
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid kernel: ") + e.what());
  }
  config_error("unknown kernel family '" + family + "' (see list-kernels)");
}

Field build_field(const Json& spec, int dimension, const std::string& name) {
  if (spec.is_number()) return constant_field(spec.get<double>());
  if (!spec.is_string()) config_error("field '" + name + "' must be a number or an expression string");
  return Expression::parse(spec.get<std::string>(), dimension).field();
}

PathConfig build_path_config(const Json& config, unsigned workers) {
  PathConfig p;
  p.dt = number_or(config, "dt", p.dt);
  if (config.contains("epsilon")) p.epsilon = number(config, "epsilon", "");
  p.t_max = number_or(config, "t_max", p.t_max);
  if (config.contains("bridge")) {
    if (!config.at("bridge").is_boolean()) config_error("field 'bridge' must be true or false");
    p.bridge_correction = config.at("bridge").get<bool>();
  }
  if (config.contains("small_jumps")) {
    const std::string mode = config.at("small_jumps").get<std::string>();
    if (mode == "gaussian") {
      p.small_jump_mode = SmallJumpMode::GaussianApprox;
    } else if (mode == "drop") {
      p.small_jump_mode = SmallJumpMode::Drop;
    } else {
      config_error("field 'small_jumps' must be \"gaussian\" or \"drop\"");
    }
  }
  if (!(p.dt > 0.0)) config_error("field 'dt' must be positive");
  if (!(p.t_max > p.dt)) config_error("field 't_max' must exceed dt");
  p.workers = workers;
  return p;
}

void validate_config(const Json& config) {
  if (!config.is_object()) config_error("config must be a JSON object");
  const Json& kind_v = require(config, "kind", "");
  if (!kind_v.is_string()) config_error("field 'kind' must be a string");
  const std::string kind = kind_v.get<std::string>();
  const auto it = required_fields().find(kind);
  if (it == required_fields().end()) config_error("unknown experiment kind '" + kind + "'");
  for (const std::string& field : it->second) require(config, field, "");
  for (const auto& [key, value] : config.items()) {
    if (!known_fields().contains(key)) config_error("unknown field '" + key + "'");
  }
  if (config.contains("seed") && !(config.at("seed").is_number_unsigned())) {
    config_error("field 'seed' must be a non-negative integer");
  }
  const int d = dimension_of(config);
  build_kernel(config.at("kernel"), d);
  build_path_config(config, 0);
  for (const char* name : {"f", "g", "c"}) {
    if (config.contains(name)) build_field(config.at(name), d, name);
  }
  if (config.contains("h") && !(number(config, "h", "") > 0.0)) config_error("field 'h' must be positive");
  if (config.contains("domain") && config.contains("x0")) start_points(config, build_domain(config.at("domain")));
}

std::uint64_t config_hash(const Json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunOutcome run_experiment(Json config, const RunOptions& options, std::ostream& log) {
  validate_config(config);
  if (options.seed) config["seed"] = *options.seed;
  if (!config.contains("seed")) config["seed"] = 0;
  const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  const std::uint64_t hash = config_hash(config);
  Outputs out(options.out_dir, "config_hash=" + hex(hash) + " seed=" + std::to_string(seed));
  Context ctx{config, options, seed, out, log};
  const std::string kind = config.at("kind").get<std::string>();
  if (kind == "solve") {
    run_solve(ctx);
  } else if (kind == "eigen") {
    run_eigen(ctx);
  } else if (kind == "faber-krahn") {
    run_faber_krahn(ctx);
  } else if (kind == "survival") {
    run_survival(ctx);
  } else if (kind == "cross-validate") {
    run_cross_validate(ctx);
  } else if (kind == "validate-kernel") {
    run_validate_kernel(ctx);
  } else if (kind == "narrow-domain") {
    run_narrow_domain(ctx);
  } else {
    run_symmetry(ctx);
  }

  RunOutcome outcome;
  for (const auto& [name, pass] : ctx.verdicts.items()) outcome.all_pass = outcome.all_pass && pass.get<bool>();
  Json files = Json::array();
  for (const auto& f : out.files()) files.push_back(f.filename().string());
  Json modules = Json::object();
  for (const char* m : {"kernel_models", "geometry", "path_sim", "dirichlet_mc", "eigen_mc", "grid_oracle", "cli"}) {
    modules[m] = MIXOP_VERSION;
  }
  outcome.summary = Json{{"kind", kind},
                         {"config", config},
                         {"config_hash", hex(hash)},
                         {"seed", seed},
                         {"version", MIXOP_VERSION},
                         {"modules", modules},
                         {"results", ctx.results},
                         {"verdicts", ctx.verdicts},
                         {"pass", outcome.all_pass},
                         {"files", files}};
  fs::create_directories(options.out_dir);
  const fs::path summary_path = options.out_dir / "summary.json";
  std::ofstream os(summary_path);
  if (!os) throw ConfigError("cannot write " + summary_path.string());
  os << outcome.summary.dump(2) << '\n';
  outcome.files = out.files();
  outcome.files.push_back(summary_path);
  return outcome;
}

}  // namespace mixop
