#include "mixop/dirichlet_mc.hpp"

#include "mixop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixop {

EstimatorResult summarize(std::span<const double> values, std::size_t censored) {
  EstimatorResult r;
  r.n_effective = values.size();
  r.censored_count = censored;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = compensated_sum(values) / n;
  CompensatedSum ss;
  for (double v : values) ss.add((v - r.mean) * (v - r.mean));
  const double var = values.size() > 1 ? ss.value() / (n - 1.0) : 0.0;
  r.std_error = std::sqrt(var / n);
  r.ci95 = {r.mean - kZ95 * r.std_error, r.mean + kZ95 * r.std_error};
  return r;
}

EstimatorResult estimate_payoff(std::span<const ExitSample> samples, const Field& g, double t_max) {
  std::vector<double> values;
  values.reserve(samples.size());
  std::size_t censored = 0;
  double g_bound = 0.0;
  double f_bound = 0.0;
  for (const ExitSample& s : samples) {
    if (s.censored) {
      ++censored;
      continue;
    }
    const double gx = g ? g(s.exit_location) : 0.0;
    if (!std::isfinite(gx)) throw DataError("exterior data g is not finite at an exit location");
    g_bound = std::max(g_bound, std::abs(gx));
    if (s.exit_time > 0.0) f_bound = std::max(f_bound, std::abs(s.occupation) / s.exit_time);
    values.push_back(s.occupation + gx);
  }
  if (values.empty()) {
    std::ostringstream os;
    os << "all " << samples.size() << " paths were censored at t_max = " << t_max << "; increase t_max";
    throw EstimationError(os.str());
  }
  EstimatorResult r = summarize(values, censored);
  // P(tau > t_max) is estimated by the censored fraction (Wilson upper bound).
  if (censored > 0) {
    const double tail = wilson_interval(censored, samples.size()).hi;
    r.censoring_bias_bound = tail * (g_bound + t_max * f_bound);
  }
  return r;
}

EstimatorResult solve_at(const Domain& domain, const Field& f, const Field& g, const Point& x0,
                         const JumpKernel& kernel, std::size_t n_paths, const PathConfig& config) {
  if (n_paths == 0) throw ArgumentError("solve_at: n_paths must be positive");
  const PathSimulator sim(domain, kernel, config);
  const auto samples = sim.simulate_many(x0, f ? &f : nullptr, n_paths);
  return estimate_payoff(samples, g, config.t_max);
}

std::vector<EstimatorResult> solve_at_shared(const Domain& domain, std::span<const std::pair<Field, Field>> data,
                                             const Point& x0, const JumpKernel& kernel, std::size_t n_paths,
                                             const PathConfig& config) {
  std::vector<EstimatorResult> out;
  out.reserve(data.size());
  for (const auto& [f, g] : data) out.push_back(solve_at(domain, f, g, x0, kernel, n_paths, config));
  return out;
}

ExitMoments exit_moments(const Domain& domain, const Point& x0, const JumpKernel& kernel, int k_max,
                         std::size_t n_paths, const PathConfig& config, std::span<const Point> extra_starts) {
  if (k_max < 1 || k_max > 4) throw ArgumentError("exit_moments: k_max must lie in 1..4");
  const PathSimulator sim(domain, kernel, config);

  auto moments_from = [&](const std::vector<ExitSample>& samples, std::vector<EstimatorResult>& out) {
    std::size_t censored = 0;
    for (const auto& s : samples) censored += s.censored ? 1 : 0;
    for (int k = 1; k <= k_max; ++k) {
      // Censored paths enter with tau = t_max, which makes each moment a lower bound.
      std::vector<double> v;
      v.reserve(samples.size());
      for (const auto& s : samples) v.push_back(std::pow(s.exit_time, k));
      EstimatorResult r = summarize(v);
      r.censored_count = censored;
      r.n_effective = samples.size() - censored;
      out.push_back(r);
    }
    return censored;
  };

  ExitMoments result;
  const auto samples = sim.simulate_many(x0, nullptr, n_paths);
  const std::size_t censored = moments_from(samples, result.moments);
  result.lower_bounds = censored > 0;
  result.theta = result.moments.front().mean;
  result.theta_std_error = result.moments.front().std_error;
  for (const Point& y : extra_starts) {
    std::vector<EstimatorResult> other;
    const auto extra = sim.simulate_many(y, nullptr, n_paths);
    if (moments_from(extra, other) > 0) result.lower_bounds = true;
    if (other.front().mean > result.theta) {
      result.theta = other.front().mean;
      result.theta_std_error = other.front().std_error;
    }
  }

  result.verdict = true;
  double factorial = 1.0;
  const double theta_hi = result.theta + 3.0 * result.theta_std_error;
  for (int k = 1; k <= k_max; ++k) {
    factorial *= k;
    const EstimatorResult& m = result.moments[static_cast<std::size_t>(k - 1)];
    const bool ok = m.mean - 3.0 * m.std_error <= factorial * std::pow(theta_hi, k);
    result.moment_pass.push_back(ok);
    result.verdict = result.verdict && ok;
  }
  return result;
}

std::vector<Point> start_lattice(const Domain& domain, int per_axis, double min_distance) {
  if (per_axis < 1) throw ArgumentError("start lattice needs at least one point per axis");
  const int d = domain.dimension();
  const Point& lo = domain.bounds_lo();
  const Point& hi = domain.bounds_hi();
  std::vector<Point> pts;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  const long long total = static_cast<long long>(std::pow(per_axis, d));
  for (long long n = 0; n < total; ++n) {
    long long rest = n;
    Point x(d);
    for (int k = 0; k < d; ++k) {
      const int i = static_cast<int>(rest % per_axis);
      rest /= per_axis;
      // Nodes at the cell centres of a per_axis partition of the bounding box.
      x(k) = lo(k) + (hi(k) - lo(k)) * (i + 0.5) / per_axis;
    }
    if (boundary_distance(domain, x) > min_distance) pts.push_back(x);
  }
  return pts;
}

double lp_norm(const Domain& domain, const Field& f, double p, int per_axis) {
  if (!(p >= 1.0)) throw ArgumentError("lp_norm: p must be at least 1");
  const int d = domain.dimension();
  const Point& lo = domain.bounds_lo();
  const Point& hi = domain.bounds_hi();
  const double cell = ((hi - lo) / per_axis).prod();
  CompensatedSum acc;
  const long long total = static_cast<long long>(std::pow(per_axis, d));
  for (long long n = 0; n < total; ++n) {
    long long rest = n;
    Point x(d);
    for (int k = 0; k < d; ++k) {
      const int i = static_cast<int>(rest % per_axis);
      rest /= per_axis;
      x(k) = lo(k) + (hi(k) - lo(k)) * (i + 0.5) / per_axis;
    }
    if (contains(domain, x)) acc.add(std::pow(std::abs(f(x)), p) * cell);
  }
  return std::pow(acc.value(), 1.0 / p);
}

AbpResult abp_ratio(const Domain& domain, const Field& f, double p, const JumpKernel& kernel, int n_starts,
                    std::size_t n_paths, const PathConfig& config) {
  const int d = domain.dimension();
  if (!(p > 0.5 * d)) {
    std::ostringstream os;
    os << "abp_ratio requires p > d/2 (p = " << p << ", d = " << d << ")";
    throw HypothesisError(os.str());
  }
  AbpResult r;
  r.starts = start_lattice(domain, n_starts, 2.0 * std::sqrt(config.dt));
  if (r.starts.empty()) throw ArgumentError("abp_ratio: start lattice is empty");
  const PathSimulator sim(domain, kernel, config);
  const Field zero = constant_field(0.0);
  for (std::size_t i = 0; i < r.starts.size(); ++i) {
    const Point& x = r.starts[i];
    if (f(x) < 0.0) throw ArgumentError("abp_ratio: f must be nonnegative");
    // Each start uses its own block of path indices.
    const auto samples = sim.simulate_many(x, &f, n_paths, static_cast<std::uint64_t>(i) * n_paths);
    r.estimates.push_back(estimate_payoff(samples, zero, config.t_max));
    if (i == 0 || r.estimates.back().mean > r.sup_u_estimate) {
      r.sup_u_estimate = r.estimates.back().mean;
      r.sup_u_std_error = r.estimates.back().std_error;
      r.sup_point = x;
    }
  }
  // Midpoint quadrature on a refinement of the start lattice.
  r.lp_norm_f = lp_norm(domain, f, p, 16 * n_starts);
  if (!(r.lp_norm_f > 0.0)) throw ArgumentError("abp_ratio: f vanishes identically");
  r.ratio = r.sup_u_estimate / r.lp_norm_f;
  return r;
}

ComparisonResult comparison_check(const Domain& domain, const Field& g, const JumpKernel& kernel, int n_starts,
                                  std::size_t n_paths, const PathConfig& config, int exterior_per_axis) {
  ComparisonResult r;
  r.starts = start_lattice(domain, n_starts, 2.0 * std::sqrt(config.dt));
  if (r.starts.empty()) throw ArgumentError("comparison_check: start lattice is empty");
  const PathSimulator sim(domain, kernel, config);
  for (std::size_t i = 0; i < r.starts.size(); ++i) {
    const auto samples = sim.simulate_many(r.starts[i], nullptr, n_paths, static_cast<std::uint64_t>(i) * n_paths);
    r.estimates.push_back(estimate_payoff(samples, g, config.t_max));
    const EstimatorResult& e = r.estimates.back();
    if (i == 0 || e.mean > r.max_interior) {
      r.max_interior = e.mean;
      r.max_interior_std_error = e.std_error;
      r.argmax = r.starts[i];
    }
  }
  // Exterior sample lattice: the bounding box grown by the larger of 1 and
  // the diameter, minus the domain.
  const int d = domain.dimension();
  const double margin = std::max(1.0, domain.diameter());
  const Point lo = domain.bounds_lo().array() - margin;
  const Point hi = domain.bounds_hi().array() + margin;
  bool any = false;
  const long long total = static_cast<long long>(std::pow(exterior_per_axis, d));
  for (long long n = 0; n < total; ++n) {
    long long rest = n;
    Point x(d);
    for (int k = 0; k < d; ++k) {
      const int i = static_cast<int>(rest % exterior_per_axis);
      rest /= exterior_per_axis;
      x(k) = lo(k) + (hi(k) - lo(k)) * i / std::max(exterior_per_axis - 1, 1);
    }
    if (contains(domain, x)) continue;
    const double gx = g(x);
    if (!any || gx > r.sup_exterior) r.sup_exterior = gx;
    any = true;
  }
  r.pass = r.max_interior - 3.0 * r.max_interior_std_error <= r.sup_exterior;
  return r;
}

}  // namespace mixop
