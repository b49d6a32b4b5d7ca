#pragma once

#include "mixop/dirichlet_mc.hpp"
#include "mixop/geometry.hpp"
#include "mixop/grid_oracle.hpp"
#include "mixop/kernel.hpp"
#include "mixop/path_sim.hpp"
#include "mixop/stats.hpp"

#include <string>
#include <vector>

namespace mixop {

struct EigenConfig {
  PathConfig path;
  /// The fit window runs from where the survival estimate drops to s_upper
  /// down to where it reaches s_lower.
  double s_upper = 0.5;
  double s_lower = 0.02;
  int window_points = 40;
};

struct EigenEstimate {
  double lambda_hat = 0.0;
  double std_error = 0.0;
  Interval ci95;
  Interval fit_window;
  double fit_r2 = 0.0;
  std::size_t n_paths = 0;
  double censored_fraction = 0.0;
  /// Largest change of lambda_hat when both window ends move by +-20%.
  double window_sensitivity = 0.0;
  /// Whether the domain is known to admit shrinking Lipschitz approximants
  /// (true for every convex shape the geometry module builds).
  bool approximants_verified = false;
  SurvivalCurve curve;
  std::vector<std::string> warnings;
};

/// Principal eigenvalue from the exponential decay of P_x(tau > t) (c = 0).
EigenEstimate estimate_lambda(const Domain& domain, const JumpKernel& kernel, const Point& x0, std::size_t n_paths,
                              const EigenConfig& config = {});

/// Same as estimate_lambda, from already simulated exit samples.
EigenEstimate estimate_lambda_from(const std::vector<ExitSample>& samples, const EigenConfig& config);

struct FaberKrahnResult {
  EigenEstimate domain;
  EigenEstimate ball;
  Domain ball_shape;
  bool verdict = false;
};

/// Compares lambda(D) with lambda of the equal-volume ball; both start at
/// their centres and run as independent streams.
FaberKrahnResult faber_krahn_compare(const Domain& domain, const JumpKernel& kernel, std::size_t n_paths,
                                     const EigenConfig& config = {});

struct DominationResult {
  std::vector<double> t;
  std::vector<double> survival_domain;
  std::vector<double> survival_ball;
  std::vector<double> joint_std_error;
  std::vector<bool> pass;
  bool verdict = false;
};

/// Checks P_0(tau_D > t) <= P_0(tau_B > t) with D translated to centroid 0.
DominationResult survival_domination_check(const Domain& domain, const JumpKernel& kernel,
                                           const std::vector<double>& t_grid, std::size_t n_paths,
                                           const PathConfig& config);

struct IdentityResult {
  std::vector<Point> points;
  std::vector<double> psi;
  std::vector<EstimatorResult> estimates;
  std::vector<double> relative_deviation;
  double max_relative_deviation = 0.0;
};

/// Estimates E_x[exp(lambda t) psi(X_t) 1{tau > t}] on a start lattice and
/// compares it with psi(x).
IdentityResult eigen_identity_residual(const Domain& domain, const JumpKernel& kernel, const GridFunction& psi,
                                       double lambda, double t, std::size_t n_paths, const PathConfig& config,
                                       int per_axis = 9);

}  // namespace mixop
