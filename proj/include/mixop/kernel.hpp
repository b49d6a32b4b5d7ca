#pragma once

#include "mixop/rng.hpp"
#include "mixop/types.hpp"

#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mixop {

enum class KernelFamily { Zero, Fractional, TruncatedFractional, TemperedFractional, CompactBump, Tabulated };

std::string to_string(KernelFamily family);

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-13;
  int max_depth = 18;
};

/// Lévy density j of the jump part. Every supported family is radial, so the
/// kernel is stored as a radial profile j(|y|) plus structural flags.
///
/// Families (s is the fractional order, profiles are unnormalized):
///   fractional            |y|^{-d-2s}
///   truncated-fractional  |y|^{-d-2s} on |y| <= R_trunc
///   tempered-fractional   |y|^{-d-2s} exp(-beta |y|)
///   compact-bump          exp(1 - 1/(1 - (|y|/2r)^2)) on |y| < 2r, positive on |y| <= r
///   tabulated             piecewise log-linear in radius through (r_i, v_i), constant
///                         below r_0, zero beyond r_n
class JumpKernel {
 public:
  static JumpKernel zero(int dimension);
  static JumpKernel fractional(int dimension, double s);
  static JumpKernel truncated_fractional(int dimension, double s, double truncation_radius);
  static JumpKernel tempered_fractional(int dimension, double s, double tempering);
  static JumpKernel compact_bump(int dimension, double positivity_radius);
  static JumpKernel tabulated(int dimension, std::vector<double> radii, std::vector<double> values);

  KernelFamily family() const { return family_; }
  int dimension() const { return dimension_; }
  bool isotropic() const { return true; }
  bool symmetric() const { return true; }
  bool radially_decreasing() const { return radially_decreasing_; }
  bool is_zero() const { return family_ == KernelFamily::Zero; }
  /// (A2) witness: j > 0 on |y| <= r. Absent for the zero kernel; +inf when j > 0 everywhere.
  std::optional<double> positivity_radius() const;
  /// Radius beyond which j vanishes (+inf for unbounded support).
  double support_radius() const;

  double s() const { return s_; }
  double truncation_radius() const { return truncation_radius_; }
  double tempering() const { return tempering_; }
  double bump_radius() const { return bump_radius_; }
  const std::vector<double>& table_radii() const { return table_radii_; }
  const std::vector<double>& table_values() const { return table_values_; }

  /// j at radius r > 0.
  double profile(double r) const;

  /// Radial integral of weight(|y|) j(y) over the shell a < |y| < b; b may be +inf.
  double shell_integral(const std::function<double(double)>& weight, double a, double b,
                        const QuadratureConfig& cfg) const;

  /// Mass of j outside the ball of radius r: lambda_r.
  double mass_outside(double r) const;
  /// int_{|y| <= r} |y|^2 j(y) dy.
  double second_moment_inside(double r) const;

  std::string describe() const;

 private:
  JumpKernel(KernelFamily family, int dimension);
  std::vector<double> breakpoints(double a, double b) const;

  KernelFamily family_;
  int dimension_;
  double s_ = 0.0;
  double truncation_radius_ = 0.0;
  double tempering_ = 0.0;
  double bump_radius_ = 0.0;
  std::vector<double> table_radii_;
  std::vector<double> table_values_;
  bool radially_decreasing_ = true;
};

/// Surface area of the unit sphere in R^d.
double unit_sphere_area(int dimension);
/// Volume of the unit ball in R^d.
double unit_ball_volume(int dimension);

/// j(y) for y != 0.
double evaluate(const JumpKernel& kernel, const Point& y);

struct IntegrabilityReport {
  bool finite = true;
  double value = 0.0;       // int (1 ^ |y|^2) j dy when finite
  double near_piece = 0.0;  // int_{|y|<=1} |y|^2 j
  double tail_piece = 0.0;  // int_{|y|>1} j
  std::string diagnostic;
};

struct IntegrabilityConfig {
  QuadratureConfig quadrature;
  double divergence_threshold = 1e12;
  int max_shells = 80;
};

IntegrabilityReport levy_integrability(const JumpKernel& kernel, const IntegrabilityConfig& cfg = {});

/// Lévy-Khinchine exponent of the jump part.
std::complex<double> symbol(const JumpKernel& kernel, const Point& z, const QuadratureConfig& cfg = {});

struct A1Report {
  double im_ratio_max = 0.0;
  std::vector<double> radii;
  std::vector<double> re_inf_per_radius;  // min over sampled |p| = r of |p|^2 + Re psi(p)
  std::vector<double> re_sup_per_radius;  // max over sampled |p| = r of the same
  bool pass = false;
};

struct A1Config {
  QuadratureConfig quadrature;
  int directions = 16;
  /// Upper bound accepted for the empirical (A1) constant. Infinite means "finite on the grid".
  double ratio_threshold = std::numeric_limits<double>::infinity();
};

A1Report check_A1(const JumpKernel& kernel, const std::vector<double>& radii, const A1Config& cfg = {});

struct SmallJumpStats {
  double epsilon = 0.0;
  double big_rate = 0.0;    // lambda_eps = int_{|y|>eps} j
  Covariance small_cov;     // Sigma_eps = int_{|y|<=eps} y y^T j
  Point compensator_drift;  // b_eps = int_{eps<|y|<=1} y j
};

SmallJumpStats small_jump_stats(const JumpKernel& kernel, double epsilon);

/// Draws jumps with density j(y) 1{|y| > eps} / lambda_eps.
class BigJumpSampler {
 public:
  BigJumpSampler(const JumpKernel& kernel, double epsilon);

  double rate() const { return rate_; }
  double epsilon() const { return epsilon_; }
  Point sample(CounterStream& stream) const;
  double sample_radius(CounterStream& stream) const;

 private:
  const JumpKernel* kernel_;
  double epsilon_;
  double rate_;
  // Rejection envelope: piecewise-constant bound on j(r) r^{d-1} over segments.
  std::vector<double> seg_lo_, seg_hi_, seg_bound_, seg_cdf_;
};

Point sample_big_jump(const JumpKernel& kernel, double epsilon, CounterStream& stream);

/// Uniformly distributed unit vector in R^d.
Point random_direction(int dimension, CounterStream& stream);

}  // namespace mixop
