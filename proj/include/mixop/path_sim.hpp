#pragma once

#include "mixop/geometry.hpp"
#include "mixop/kernel.hpp"
#include "mixop/stats.hpp"
#include "mixop/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace mixop {

enum class SmallJumpMode { GaussianApprox, Drop };

struct PathConfig {
  double dt = 1e-3;
  /// Small-jump cut; defaults to default_epsilon(kernel, dt).
  std::optional<double> epsilon;
  SmallJumpMode small_jump_mode = SmallJumpMode::GaussianApprox;
  /// Brownian-bridge exit sampling between steps (ball, box and interval domains).
  bool bridge_correction = false;
  double t_max = 10.0;
  std::uint64_t base_seed = 0;
  /// Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
  unsigned workers = 0;
};

struct ExitSample {
  double exit_time = 0.0;
  Point exit_location;
  double occupation = 0.0;
  bool censored = false;
};

/// Largest epsilon in (0, 1] with dt trace(Sigma_eps) <= 0.1 (2 dt d), i.e. the
/// small-jump Gaussian carries at most a tenth of the Brownian step variance.
double default_epsilon(const JumpKernel& kernel);

/// Simulates X = B + Y with B of generator Laplacian (covariance 2t I) and Y
/// the jump part, split into a compensated Gaussian for |y| <= eps and a
/// compound Poisson process for |y| > eps.
class PathSimulator {
 public:
  PathSimulator(const Domain& domain, const JumpKernel& kernel, const PathConfig& config);

  ExitSample simulate(const Point& x0, const Field* running_cost, std::uint64_t path_index) const;

  /// Simulates n paths with indices [first_index, first_index + n).
  std::vector<ExitSample> simulate_many(const Point& x0, const Field* running_cost, std::size_t n,
                                        std::uint64_t first_index = 0) const;

  /// Position after `t` (a multiple of dt) and whether the path is still
  /// inside; used by the eigenfunction identity.
  struct Snapshot {
    Point position;
    bool alive = false;
  };
  Snapshot snapshot(const Point& x0, double t, std::uint64_t path_index) const;

  const Domain& domain() const { return *domain_; }
  const JumpKernel& kernel() const { return *kernel_; }
  const PathConfig& config() const { return config_; }
  const SmallJumpStats& stats() const { return stats_; }
  double epsilon() const { return stats_.epsilon; }
  /// Per-coordinate variance rate of the continuous part.
  double diffusion_rate() const { return variance_rate_; }

 private:
  // Returns true on exit; `x` is overwritten with the exit location.
  bool step(Point& x, std::uint64_t path_key, std::uint64_t k) const;
  double bridge_probability(const Point& a, const Point& b) const;
  Point bridge_exit_location(const Point& a, const Point& b) const;

  // Shared so that the sampler's kernel reference survives copies.
  std::shared_ptr<const Domain> domain_;
  std::shared_ptr<const JumpKernel> kernel_;
  PathConfig config_;
  SmallJumpStats stats_;
  BigJumpSampler sampler_;
  double variance_rate_ = 2.0;
  double step_sd_ = 0.0;
  Point drift_step_;
  double jump_mean_ = 0.0;
  double no_jump_prob_ = 1.0;
  long long n_steps_ = 0;
  bool use_bridge_ = false;
};

ExitSample simulate_exit(const Domain& domain, const Point& x0, const Field* running_cost, const JumpKernel& kernel,
                         const PathConfig& config, std::uint64_t path_index);

struct SurvivalCurve {
  std::vector<double> t;
  std::vector<double> survival;
  std::vector<Interval> ci95;
  std::size_t n_paths = 0;
  std::size_t censored = 0;
};

/// Survival estimates S(t) = P_x(tau > t) from pathwise indicators; censored
/// paths count as survivors.
SurvivalCurve survival_curve(const Domain& domain, const Point& x0, const JumpKernel& kernel,
                             const std::vector<double>& t_grid, std::size_t n_paths, const PathConfig& config);

SurvivalCurve survival_from_samples(const std::vector<ExitSample>& samples, const std::vector<double>& t_grid);

}  // namespace mixop
