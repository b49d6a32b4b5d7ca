#pragma once

#include "mixop/geometry.hpp"
#include "mixop/kernel.hpp"
#include "mixop/types.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace mixop {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct AssembleOptions {
  /// Truncation radius of the nonlocal stencil; defaults to the larger of 1,
  /// diam(D) and the radius where the tail mass drops below 1e-3 h^{-2}.
  std::optional<double> r_max;
  /// Value of g assigned to jumps longer than r_max.
  double far_field = 0.0;
  /// Cells whose centre lies within this many h of the origin get sub-cell quadrature.
  double refine_radius_cells = 10.0;
  int refine_subcells = 8;
};

/// Discretization of L + c on the uniform grid hZ^d restricted to D, with the
/// exterior nodes reached by the stencil forming the collar.
///
/// Row i represents
///   (1 + a) Delta_h u(x_i) + sum_k w_k (u(x_i + y_k) - u(x_i)) - kappa_tail u(x_i) + c_i u(x_i)
/// where a = (1/2d) int_{|y|<2h} |y|^2 j absorbs the near field, w_k integrates
/// j over grid cell k outside the 2h-ball, and kappa_tail = int_{|y|>r_max} j.
/// Values at collar nodes come from g; the tail is paid with the far-field constant.
class GridOperator {
 public:
  struct Offset {
    std::array<int, 3> shift{0, 0, 0};
    double weight = 0.0;
  };

  int dimension() const { return dimension_; }
  double h() const { return h_; }
  double r_max() const { return r_max_; }
  double kappa_tail() const { return kappa_tail_; }
  double far_field() const { return far_field_; }
  double near_diffusion() const { return near_diffusion_; }
  const Domain& domain() const { return domain_; }
  const JumpKernel& kernel() const { return kernel_; }

  /// Interior coupling block, including the diagonal but excluding c.
  const SparseMatrix& matrix() const { return matrix_; }
  const Eigen::VectorXd& zeroth_order() const { return c_; }
  /// Total stencil weight landing on collar nodes, per interior row.
  const Eigen::VectorXd& collar_mass() const { return collar_mass_; }
  const std::vector<Offset>& offsets() const { return offsets_; }

  std::size_t size() const { return nodes_.size(); }
  Point node(std::size_t i) const;
  const std::array<int, 3>& node_index(std::size_t i) const { return nodes_[i]; }
  /// Interior row of the grid node with integer coordinates `index`, if any.
  std::optional<std::size_t> interior_row(const std::array<int, 3>& index) const;
  bool symmetric() const { return symmetric_; }

  /// Load from exterior data: sum over collar targets of w g(target) plus kappa_tail * far_field.
  Eigen::VectorXd exterior_load(const Field& g) const;
  /// (L_h + c) applied to a field sampled at every node (interior and collar).
  Eigen::VectorXd apply(const Field& u) const;

  /// Coordinate-format dump "row col value" for debugging.
  void write_triplets(std::ostream& os) const;

 private:
  friend GridOperator assemble(const Domain&, const JumpKernel&, const Field&, double, const AssembleOptions&);
  GridOperator(Domain domain, JumpKernel kernel) : domain_(std::move(domain)), kernel_(std::move(kernel)) {}
  std::size_t flat(const std::array<int, 3>& index) const;
  bool in_grid(const std::array<int, 3>& index) const;

  Domain domain_;
  JumpKernel kernel_;
  int dimension_ = 0;
  double h_ = 0.0;
  double r_max_ = 0.0;
  double kappa_tail_ = 0.0;
  double far_field_ = 0.0;
  double near_diffusion_ = 0.0;
  bool symmetric_ = true;
  std::array<int, 3> lo_{0, 0, 0};
  std::array<int, 3> extent_{1, 1, 1};
  std::vector<int> row_of_;  // flat grid index -> interior row or -1
  std::vector<std::array<int, 3>> nodes_;
  std::vector<Offset> offsets_;
  SparseMatrix matrix_;
  Eigen::VectorXd c_;
  Eigen::VectorXd collar_mass_;
};

/// Assembles the grid operator. An empty c means c = 0.
GridOperator assemble(const Domain& domain, const JumpKernel& kernel, const Field& c, double h,
                      const AssembleOptions& options = {});

/// Nodal values on the interior with exterior values supplied by a field.
struct GridFunction {
  const GridOperator* op = nullptr;
  Eigen::VectorXd values;
  Field exterior;  // empty means zero outside D

  double at_node(const std::array<int, 3>& index) const;
  /// Multilinear interpolation between grid nodes.
  double interpolate(const Point& x) const;
  void write_csv(std::ostream& os) const;
};

struct SolveReport {
  double residual = 0.0;
  int iterations = 0;
};

/// Solves L_h u + c u = -f in D with u = g on the collar. Requires c <= 0
/// unless allow_positive_c is set (used by the narrow-domain experiment).
GridFunction solve_dirichlet(const GridOperator& op, const Field& f, const Field& g, SolveReport* report = nullptr,
                             bool allow_positive_c = false);

struct Eigenpair {
  double lambda = 0.0;
  GridFunction psi;  // max-normalized
  bool perron_positive = false;
  double residual = 0.0;
  int iterations = 0;
  double value_at_centroid = 0.0;
};

/// Smallest lambda with (L_h + c) psi = -lambda psi, psi = 0 outside D, by
/// shifted inverse power iteration.
Eigenpair principal_eigenpair(const GridOperator& op, double tolerance = 1e-10, int max_iterations = 1000);

struct Nonlinearity {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

struct SemilinearReport {
  int iterations = 0;
  double residual = 0.0;
};

/// Damped Newton for L_h u = f(u) in D with u = 0 outside.
GridFunction solve_semilinear(const GridOperator& op, const Nonlinearity& f, const Eigen::VectorXd& u_init,
                              SemilinearReport* report = nullptr, double tolerance = 1e-8, int max_iterations = 100);

struct BoundaryDecayResult {
  double eta_lower = 0.0;
  double c_upper = 0.0;
  double exponent = 0.0;  // log-log slope of u against boundary distance
  std::size_t nodes = 0;
  bool pass = false;
};

/// Ratios u / dist(x, boundary) over nodes with distance in [2h, band * radius].
BoundaryDecayResult boundary_decay_check(const GridFunction& u, double band = 0.25);

struct SymmetryResult {
  double max_deviation = 0.0;  // relative to max |u|
  bool strictly_decreasing = false;
  bool pass = false;
  std::vector<double> bin_radius;
  std::vector<double> bin_mean;
};

/// Radial-symmetry and monotonicity check on a ball centred at the origin.
SymmetryResult symmetry_check(const GridFunction& u, double tolerance, std::optional<double> bin_width = std::nullopt);

struct NarrowDomainScan {
  std::vector<double> c_values;
  std::vector<double> widths;
  /// sign_ok[i][j]: u <= 0 for c_values[i] and widths[j].
  std::vector<std::vector<bool>> sign_ok;
  /// Smallest tested width at which u <= 0 first fails (inf if never).
  std::vector<double> threshold;
};

/// Solves (L_h + c) u = 0 on slabs (-1,1)^{d-1} x (0, w) with u = -1 outside
/// and constant c > 0, recording where u <= 0 holds.
NarrowDomainScan narrow_domain_scan(const JumpKernel& kernel, const std::vector<double>& c_values,
                                    const std::vector<double>& widths, double h, const AssembleOptions& options = {});

}  // namespace mixop
