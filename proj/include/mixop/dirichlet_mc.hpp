#pragma once

#include "mixop/geometry.hpp"
#include "mixop/kernel.hpp"
#include "mixop/path_sim.hpp"
#include "mixop/stats.hpp"

#include <span>
#include <vector>

namespace mixop {

struct EstimatorResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_effective = 0;
  std::size_t censored_count = 0;
  Interval ci95;
  /// Upper bound on the bias caused by discarding censored paths.
  double censoring_bias_bound = 0.0;
};

/// Mean, standard error and 95% interval of an ordered sample.
EstimatorResult summarize(std::span<const double> values, std::size_t censored = 0);

/// Monte Carlo value of u(x0) for L u = -f in D, u = g outside D:
/// u(x) = E_x[int_0^tau f(X_t) dt] + E_x[g(X_tau)]. An empty f means f = 0.
EstimatorResult solve_at(const Domain& domain, const Field& f, const Field& g, const Point& x0,
                         const JumpKernel& kernel, std::size_t n_paths, const PathConfig& config);

/// Same paths for every (f, g) pair, so linear combinations of the data give
/// the same combination of estimates up to rounding.
std::vector<EstimatorResult> solve_at_shared(const Domain& domain, std::span<const std::pair<Field, Field>> data,
                                             const Point& x0, const JumpKernel& kernel, std::size_t n_paths,
                                             const PathConfig& config);

/// Payoff estimate from already simulated exit samples.
EstimatorResult estimate_payoff(std::span<const ExitSample> samples, const Field& g, double t_max);

struct ExitMoments {
  std::vector<EstimatorResult> moments;  // E[tau^k], k = 1..k_max
  double theta = 0.0;                    // max over tested starts of E[tau]
  double theta_std_error = 0.0;
  std::vector<bool> moment_pass;         // E[tau^k] <= k! theta^k within 3 sigma
  bool verdict = false;
  /// Censored paths were present: moments are lower bounds.
  bool lower_bounds = false;
};

ExitMoments exit_moments(const Domain& domain, const Point& x0, const JumpKernel& kernel, int k_max,
                         std::size_t n_paths, const PathConfig& config, std::span<const Point> extra_starts = {});

/// Regular lattice of `per_axis` points per coordinate over the bounding box,
/// keeping points with boundary distance above `min_distance`.
std::vector<Point> start_lattice(const Domain& domain, int per_axis, double min_distance);

/// L^p norm of f over D by midpoint quadrature with `per_axis` cells per coordinate.
double lp_norm(const Domain& domain, const Field& f, double p, int per_axis);

struct AbpResult {
  double sup_u_estimate = 0.0;
  double sup_u_std_error = 0.0;
  Point sup_point;
  double lp_norm_f = 0.0;
  double ratio = 0.0;
  std::vector<Point> starts;
  std::vector<EstimatorResult> estimates;
};

/// Empirical constant in sup_D u <= C ||f||_{L^p(D)} for g = 0 outside.
AbpResult abp_ratio(const Domain& domain, const Field& f, double p, const JumpKernel& kernel, int n_starts,
                    std::size_t n_paths, const PathConfig& config);

struct ComparisonResult {
  double max_interior = 0.0;
  double max_interior_std_error = 0.0;
  Point argmax;
  double sup_exterior = 0.0;
  bool pass = false;
  std::vector<Point> starts;
  std::vector<EstimatorResult> estimates;
};

/// Checks sup_D u <= sup_{D^c} g for f = 0, with a 3-sigma allowance.
ComparisonResult comparison_check(const Domain& domain, const Field& g, const JumpKernel& kernel, int n_starts,
                                  std::size_t n_paths, const PathConfig& config, int exterior_per_axis = 41);

}  // namespace mixop
