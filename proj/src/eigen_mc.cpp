#include "mixop/eigen_mc.hpp"

#include "mixop/errors.hpp"
#include "mixop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mixop {

namespace {

constexpr std::uint64_t kBallStream = 0x9e3779b97f4a7c15ULL;

void require_faber_krahn_hypotheses(const JumpKernel& kernel) {
  if (!kernel.isotropic()) throw HypothesisError("Faber-Krahn comparison requires an isotropic kernel");
  if (!kernel.radially_decreasing()) {
    throw HypothesisError("Faber-Krahn comparison requires a radially decreasing kernel");
  }
}

struct Fit {
  double lambda = 0.0;
  double std_error = 0.0;
  double r2 = 0.0;
};

/// Weighted least squares of log S on t over [a, b]. The variance of the
/// slope uses the full covariance Cov(log S_i, log S_j) = (1 - S_i)/(n S_i)
/// for t_i <= t_j.
Fit fit_window(const std::vector<double>& times, std::size_t n, double a, double b, int points,
               SurvivalCurve* curve) {
  std::vector<double> ts;
  for (int k = 0; k < points; ++k) ts.push_back(a + (b - a) * k / (points - 1));
  std::vector<double> t, s;
  for (double tk : ts) {
    const auto alive = static_cast<std::size_t>(times.end() - std::upper_bound(times.begin(), times.end(), tk));
    if (alive == 0) continue;
    t.push_back(tk);
    s.push_back(static_cast<double>(alive) / static_cast<double>(n));
  }
  if (t.size() < 4) {
    std::ostringstream os;
    os << "fewer than 4 usable survival points in the fit window [" << a << ", " << b << "]";
    throw EstimationError(os.str());
  }
  const std::size_t m = t.size();
  const double nn = static_cast<double>(n);
  std::vector<double> var(m), w(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    var[i] = std::max((1.0 - s[i]) / (nn * s[i]), 1.0 / (nn * nn));
    w[i] = 1.0 / var[i];
    y[i] = std::log(s[i]);
  }
  CompensatedSum sw, st, sy;
  for (std::size_t i = 0; i < m; ++i) {
    sw.add(w[i]);
    st.add(w[i] * t[i]);
    sy.add(w[i] * y[i]);
  }
  const double tbar = st.value() / sw.value();
  const double ybar = sy.value() / sw.value();
  CompensatedSum stt, sty, syy;
  for (std::size_t i = 0; i < m; ++i) {
    stt.add(w[i] * (t[i] - tbar) * (t[i] - tbar));
    sty.add(w[i] * (t[i] - tbar) * (y[i] - ybar));
    syy.add(w[i] * (y[i] - ybar) * (y[i] - ybar));
  }
  Fit fit;
  const double slope = sty.value() / stt.value();
  fit.lambda = -slope;
  fit.r2 = syy.value() > 0.0 ? sty.value() * sty.value() / (stt.value() * syy.value()) : 1.0;
  // slope = sum c_i y_i with c_i = w_i (t_i - tbar) / Stt.
  std::vector<double> c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = w[i] * (t[i] - tbar) / stt.value();
  CompensatedSum v;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t early = std::min(i, j);
      v.add(c[i] * c[j] * (1.0 - s[early]) / (nn * s[early]));
    }
  }
  fit.std_error = std::sqrt(std::max(v.value(), 0.0));
  if (curve) {
    curve->t = t;
    curve->survival = s;
    curve->ci95.clear();
    for (double si : s) {
      const auto alive = static_cast<std::size_t>(std::llround(si * nn));
      curve->ci95.push_back(wilson_interval(alive, n));
    }
  }
  return fit;
}

/// Time at which the empirical survival first drops to `level`.
double survival_quantile(const std::vector<double>& times, std::size_t n, double level) {
  const auto survivors = static_cast<std::size_t>(std::floor(level * static_cast<double>(n)));
  const std::size_t index = n - survivors;  // times[index - 1] is the exit that leaves `survivors` alive
  return times[std::min(n - 1, std::max<std::size_t>(index, 1) - 1)];
}

}  // namespace

EigenEstimate estimate_lambda_from(const std::vector<ExitSample>& samples, const EigenConfig& config) {
  if (samples.empty()) throw ArgumentError("estimate_lambda: no samples");
  if (!(config.s_lower > 0.0 && config.s_lower < config.s_upper && config.s_upper < 1.0)) {
    throw ArgumentError("estimate_lambda: survival window needs 0 < s_lower < s_upper < 1");
  }
  if (config.window_points < 4) throw ArgumentError("estimate_lambda: window_points must be at least 4");
  const std::size_t n = samples.size();
  const double t_max = config.path.t_max;
  std::vector<double> times;
  times.reserve(n);
  std::size_t censored = 0;
  for (const auto& s : samples) {
    // Censored paths survive past every time in (0, t_max].
    times.push_back(s.censored ? std::numeric_limits<double>::infinity() : s.exit_time);
    censored += s.censored ? 1 : 0;
  }
  std::sort(times.begin(), times.end());

  EigenEstimate e;
  e.n_paths = n;
  e.censored_fraction = static_cast<double>(censored) / static_cast<double>(n);
  double a = std::min(survival_quantile(times, n, config.s_upper), t_max);
  double b = std::min(survival_quantile(times, n, config.s_lower), t_max);
  if (!(b > a)) {
    std::ostringstream os;
    os << "survival does not decay over (0, t_max = " << t_max << "]; increase t_max";
    throw EstimationError(os.str());
  }
  e.fit_window = {a, b};
  const Fit fit = fit_window(times, n, a, b, config.window_points, &e.curve);
  e.curve.n_paths = n;
  e.curve.censored = censored;
  e.lambda_hat = fit.lambda;
  e.std_error = fit.std_error;
  e.ci95 = {fit.lambda - kZ95 * fit.std_error, fit.lambda + kZ95 * fit.std_error};
  e.fit_r2 = fit.r2;
  for (double scale : {0.8, 1.2}) {
    const double sa = std::min(a * scale, t_max);
    const double sb = std::min(b * scale, t_max);
    if (!(sb > sa)) continue;
    try {
      const Fit other = fit_window(times, n, sa, sb, config.window_points, nullptr);
      e.window_sensitivity = std::max(e.window_sensitivity, std::abs(other.lambda - fit.lambda));
    } catch (const EstimationError&) {
      e.warnings.push_back("window sensitivity: shifted window has too few survivors");
    }
  }
  if (e.censored_fraction > config.s_lower) {
    e.warnings.push_back("more paths censored than the lower window level; the window is cut at t_max");
  }
  return e;
}

EigenEstimate estimate_lambda(const Domain& domain, const JumpKernel& kernel, const Point& x0, std::size_t n_paths,
                              const EigenConfig& config) {
  if (!contains(domain, x0)) throw ArgumentError("estimate_lambda: start point lies outside the domain");
  if (n_paths < 10) throw ArgumentError("estimate_lambda: n_paths must be at least 10");
  const PathSimulator sim(domain, kernel, config.path);
  EigenEstimate e = estimate_lambda_from(sim.simulate_many(x0, nullptr, n_paths), config);
  // All shapes built by the geometry module are convex, so dilations about
  // an interior point give shrinking Lipschitz approximants.
  e.approximants_verified = true;
  if (!kernel.is_zero() && !kernel.positivity_radius()) {
    e.warnings.push_back("kernel is not positive near the origin; the eigenvalue representation is not guaranteed");
  }
  return e;
}

FaberKrahnResult faber_krahn_compare(const Domain& domain, const JumpKernel& kernel, std::size_t n_paths,
                                     const EigenConfig& config) {
  require_faber_krahn_hypotheses(kernel);
  const Domain ball = equal_volume_ball(domain);
  EigenConfig ball_config = config;
  ball_config.path.base_seed = config.path.base_seed ^ kBallStream;
  FaberKrahnResult r{estimate_lambda(domain, kernel, domain.centroid(), n_paths, config),
                     estimate_lambda(ball, kernel, ball.centroid(), n_paths, ball_config), ball, false};
  const double slack = r.domain.ci95.half_width() + r.ball.ci95.half_width();
  r.verdict = r.domain.lambda_hat >= r.ball.lambda_hat - slack;
  return r;
}

DominationResult survival_domination_check(const Domain& domain, const JumpKernel& kernel,
                                           const std::vector<double>& t_grid, std::size_t n_paths,
                                           const PathConfig& config) {
  require_faber_krahn_hypotheses(kernel);
  const Domain centred = domain.translated(-domain.centroid());
  const Domain ball = equal_volume_ball(domain);
  const Point origin = Point::Zero(domain.dimension());
  PathConfig ball_config = config;
  ball_config.base_seed = config.base_seed ^ kBallStream;
  const SurvivalCurve sd = survival_curve(centred, origin, kernel, t_grid, n_paths, config);
  const SurvivalCurve sb = survival_curve(ball, origin, kernel, t_grid, n_paths, ball_config);
  DominationResult r;
  r.t = t_grid;
  r.survival_domain = sd.survival;
  r.survival_ball = sb.survival;
  r.verdict = true;
  const double n = static_cast<double>(n_paths);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double pd = sd.survival[i];
    const double pb = sb.survival[i];
    const double se = std::sqrt((pd * (1.0 - pd) + pb * (1.0 - pb)) / n);
    r.joint_std_error.push_back(se);
    const bool ok = pd <= pb + 3.0 * se;
    r.pass.push_back(ok);
    r.verdict = r.verdict && ok;
  }
  return r;
}

IdentityResult eigen_identity_residual(const Domain& domain, const JumpKernel& kernel, const GridFunction& psi,
                                       double lambda, double t, std::size_t n_paths, const PathConfig& config,
                                       int per_axis) {
  if (!(t > 0.0)) throw ArgumentError("eigen_identity_residual: t must be positive");
  if (t >= config.t_max) throw ArgumentError("eigen_identity_residual: t must be below t_max");
  if (n_paths < 2) throw ArgumentError("eigen_identity_residual: n_paths must be at least 2");
  const PathSimulator sim(domain, kernel, config);
  IdentityResult r;
  r.points = start_lattice(domain, per_axis, 0.25 * domain.inradius());
  if (r.points.empty()) throw ArgumentError("eigen_identity_residual: empty start lattice");
  const double growth = std::exp(lambda * t);
  std::vector<double> values(n_paths);
  for (std::size_t p = 0; p < r.points.size(); ++p) {
    const Point& x = r.points[p];
    const std::uint64_t first = static_cast<std::uint64_t>(p) * n_paths;
    parallel_for(n_paths, config.workers, [&](std::size_t i) {
      const auto snap = sim.snapshot(x, t, first + i);
      values[i] = snap.alive ? growth * psi.interpolate(snap.position) : 0.0;
    });
    const EstimatorResult est = summarize(values);
    const double target = psi.interpolate(x);
    const double dev = std::abs(est.mean - target) / std::abs(target);
    r.psi.push_back(target);
    r.estimates.push_back(est);
    r.relative_deviation.push_back(dev);
    r.max_relative_deviation = std::max(r.max_relative_deviation, dev);
  }
  return r;
}

}  // namespace mixop
