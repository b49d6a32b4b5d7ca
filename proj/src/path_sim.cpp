#include "mixop/path_sim.hpp"

#include "mixop/errors.hpp"
#include "mixop/parallel.hpp"
#include "mixop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixop {

double default_epsilon(const JumpKernel& kernel) {
  if (kernel.is_zero()) return 1.0;
  const double budget = 0.2 * kernel.dimension();
  if (kernel.second_moment_inside(1.0) <= budget) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kernel.second_moment_inside(mid) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

namespace {

double resolve_epsilon(const JumpKernel& kernel, const PathConfig& config) {
  const double eps = config.epsilon.value_or(default_epsilon(kernel));
  if (!(eps > 0.0) || eps > 1.0) throw ArgumentError("path config: epsilon must lie in (0, 1]");
  return eps;
}

void validate(const PathConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw ArgumentError("path config: dt must be positive");
  if (!(config.t_max > 0.0) || !std::isfinite(config.t_max)) {
    throw ArgumentError("path config: t_max must be positive");
  }
}

}  // namespace

PathSimulator::PathSimulator(const Domain& domain, const JumpKernel& kernel, const PathConfig& config)
    : domain_(std::make_shared<const Domain>(domain)),
      kernel_(std::make_shared<const JumpKernel>(kernel)),
      config_((validate(config), config)),
      stats_(small_jump_stats(kernel, resolve_epsilon(kernel, config))),
      sampler_(*kernel_, stats_.epsilon) {
  if (domain.dimension() != kernel.dimension()) {
    throw ArgumentError("domain and kernel dimensions differ");
  }
  const int d = kernel.dimension();
  const double dt = config.dt;
  // Isotropic kernels have Sigma_eps proportional to the identity.
  const double small_var =
      config.small_jump_mode == SmallJumpMode::GaussianApprox ? stats_.small_cov.trace() / static_cast<double>(d) : 0.0;
  variance_rate_ = 2.0 + small_var;
  step_sd_ = std::sqrt(variance_rate_ * dt);
  drift_step_ = -dt * stats_.compensator_drift;
  jump_mean_ = sampler_.rate() * dt;
  no_jump_prob_ = std::exp(-jump_mean_);
  n_steps_ = static_cast<long long>(std::floor(config.t_max / dt * (1.0 + 1e-12)));
  use_bridge_ = config.bridge_correction &&
                (domain.kind() == ShapeKind::Ball || domain.kind() == ShapeKind::Box ||
                 domain.kind() == ShapeKind::Interval);
}

double PathSimulator::bridge_probability(const Point& a, const Point& b) const {
  const double scale = 2.0 / (variance_rate_ * config_.dt);
  // Beyond 8 step deviations from the boundary the probability is below e^-128.
  const double far = 8.0 * step_sd_;
  if (const Ball* ball = domain_->as_ball()) {
    const double db = ball->radius - (b - ball->center).norm();
    if (db > far) return 0.0;
    const double da = ball->radius - (a - ball->center).norm();
    return std::exp(-scale * da * db);
  }
  const Box* box = domain_->as_box();
  if (boundary_distance(*domain_, b) > far) return 0.0;
  double stay = 1.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double lo_a = a(i) - box->lo(i);
    const double lo_b = b(i) - box->lo(i);
    const double hi_a = box->hi(i) - a(i);
    const double hi_b = box->hi(i) - b(i);
    stay *= (1.0 - std::exp(-scale * lo_a * lo_b)) * (1.0 - std::exp(-scale * hi_a * hi_b));
  }
  return 1.0 - stay;
}

Point PathSimulator::bridge_exit_location(const Point& a, const Point& b) const {
  if (const Ball* ball = domain_->as_ball()) {
    Point dir = b - ball->center;
    const double n = dir.norm();
    if (n == 0.0) {
      dir = Point::Zero(b.size());
      dir(0) = 1.0;
    } else {
      dir /= n;
    }
    return ball->center + ball->radius * (1.0 + 1e-12) * dir;
  }
  // Box: the face whose crossing probability is largest.
  const Box* box = domain_->as_box();
  const double scale = 2.0 / (variance_rate_ * config_.dt);
  double best = -1.0;
  Eigen::Index axis = 0;
  bool upper = false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double p_lo = std::exp(-scale * (a(i) - box->lo(i)) * (b(i) - box->lo(i)));
    const double p_hi = std::exp(-scale * (box->hi(i) - a(i)) * (box->hi(i) - b(i)));
    if (p_lo > best) {
      best = p_lo;
      axis = i;
      upper = false;
    }
    if (p_hi > best) {
      best = p_hi;
      axis = i;
      upper = true;
    }
  }
  Point out = b;
  out(axis) = upper ? box->hi(axis) : box->lo(axis);
  return out;
}

bool PathSimulator::step(Point& x, std::uint64_t path_key, std::uint64_t k) const {
  CounterStream rs = CounterStream::at_step(path_key, k, 0);
  const int d = static_cast<int>(x.size());
  Point next = x;
  double a, b;
  rs.normal_pair(a, b);
  next(0) += step_sd_ * a;
  if (d >= 2) next(1) += step_sd_ * b;
  if (d == 3) next(2) += step_sd_ * rs.normal();
  next += drift_step_;

  if (!contains(*domain_, next)) {
    x = next;
    return true;
  }
  if (use_bridge_) {
    // Separate lane so that the bridge draw never shifts the jump stream.
    const double p = bridge_probability(x, next);
    if (p > 0.0 && CounterStream::at_step(path_key, k, 1).uniform() < p) {
      x = bridge_exit_location(x, next);
      return true;
    }
  }
  if (jump_mean_ > 0.0) {
    // Poisson(jump_mean) by inversion.
    double u = rs.uniform();
    double p = no_jump_prob_;
    int count = 0;
    while (u > p) {
      u -= p;
      ++count;
      p *= jump_mean_ / count;
      if (p == 0.0) break;
    }
    for (int j = 0; j < count; ++j) {
      next += sampler_.sample(rs);
      if (!contains(*domain_, next)) {
        x = next;
        return true;
      }
    }
  }
  x = next;
  return false;
}

ExitSample PathSimulator::simulate(const Point& x0, const Field* running_cost, std::uint64_t path_index) const {
  if (x0.size() != domain_->dimension()) throw ArgumentError("simulate_exit: start point dimension mismatch");
  if (!contains(*domain_, x0)) throw ArgumentError("simulate_exit: start point lies outside the domain");
  ExitSample out;
  Point x = x0;
  const double dt = config_.dt;
  CompensatedSum occupation;
  const std::uint64_t key = CounterStream::path_key(config_.base_seed, path_index);
  for (long long k = 0; k < n_steps_; ++k) {
    if (running_cost) {
      const double fx = (*running_cost)(x);
      if (!std::isfinite(fx)) {
        std::ostringstream os;
        os << "running cost is not finite at step " << k;
        throw DataError(os.str());
      }
      occupation.add(fx * dt);
    }
    if (step(x, key, static_cast<std::uint64_t>(k))) {
      out.exit_time = static_cast<double>(k + 1) * dt;
      out.exit_location = x;
      out.occupation = occupation.value();
      return out;
    }
  }
  out.censored = true;
  out.exit_time = config_.t_max;
  out.exit_location = x;
  out.occupation = occupation.value();
  return out;
}

std::vector<ExitSample> PathSimulator::simulate_many(const Point& x0, const Field* running_cost, std::size_t n,
                                                     std::uint64_t first_index) const {
  std::vector<ExitSample> out(n);
  parallel_for(n, config_.workers, [&](std::size_t i) { out[i] = simulate(x0, running_cost, first_index + i); });
  return out;
}

PathSimulator::Snapshot PathSimulator::snapshot(const Point& x0, double t, std::uint64_t path_index) const {
  if (!contains(*domain_, x0)) throw ArgumentError("snapshot: start point lies outside the domain");
  const long long m = std::llround(t / config_.dt);
  Snapshot snap{x0, true};
  const std::uint64_t key = CounterStream::path_key(config_.base_seed, path_index);
  for (long long k = 0; k < m; ++k) {
    if (step(snap.position, key, static_cast<std::uint64_t>(k))) {
      snap.alive = false;
      return snap;
    }
  }
  return snap;
}

ExitSample simulate_exit(const Domain& domain, const Point& x0, const Field* running_cost, const JumpKernel& kernel,
                         const PathConfig& config, std::uint64_t path_index) {
  const IntegrabilityReport integrable = levy_integrability(kernel);
  if (!integrable.finite) throw ArgumentError("simulate_exit: kernel is not a Lévy density: " + integrable.diagnostic);
  return PathSimulator(domain, kernel, config).simulate(x0, running_cost, path_index);
}

SurvivalCurve survival_from_samples(const std::vector<ExitSample>& samples, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ArgumentError("survival_curve: empty time grid");
  SurvivalCurve curve;
  curve.n_paths = samples.size();
  std::vector<double> times;
  times.reserve(samples.size());
  for (const ExitSample& s : samples) {
    if (s.censored) {
      ++curve.censored;
      times.push_back(std::numeric_limits<double>::infinity());
    } else {
      times.push_back(s.exit_time);
    }
  }
  std::sort(times.begin(), times.end());
  curve.t = t_grid;
  for (double t : t_grid) {
    const auto survivors = static_cast<std::size_t>(times.end() - std::upper_bound(times.begin(), times.end(), t));
    curve.survival.push_back(static_cast<double>(survivors) / static_cast<double>(samples.size()));
    curve.ci95.push_back(wilson_interval(survivors, samples.size()));
  }
  return curve;
}

SurvivalCurve survival_curve(const Domain& domain, const Point& x0, const JumpKernel& kernel,
                             const std::vector<double>& t_grid, std::size_t n_paths, const PathConfig& config) {
  if (t_grid.empty()) throw ArgumentError("survival_curve: empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || t_grid[i] > config.t_max * (1.0 + 1e-12) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw ArgumentError("survival_curve: time grid must be increasing inside (0, t_max]");
    }
  }
  if (n_paths == 0) throw ArgumentError("survival_curve: n_paths must be positive");
  const PathSimulator sim(domain, kernel, config);
  return survival_from_samples(sim.simulate_many(x0, nullptr, n_paths), t_grid);
}

}  // namespace mixop
