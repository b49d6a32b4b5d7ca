#include "mixop/grid_oracle.hpp"

#include "mixop/errors.hpp"
#include "mixop/stats.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace mixop {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Problems at most this large are factorized directly.
constexpr Eigen::Index kDirectNonZeros = 3'000'000;
// Systems up to this size with at least this fill are factorized densely.
constexpr Eigen::Index kDenseMaxRows = 8000;
constexpr double kDenseFill = 0.03;

double default_r_max(const Domain& domain, const JumpKernel& kernel, double h) {
  double r = std::max(1.0, domain.diameter());
  if (kernel.is_zero()) return r;
  const double budget = 1e-3 / (h * h);
  while (std::isfinite(kernel.support_radius()) ? r < kernel.support_radius() && kernel.mass_outside(r) > budget
                                                : kernel.mass_outside(r) > budget) {
    r *= 1.5;
  }
  return r;
}

/// Integral of j over the cell centred at `centre` (side h), restricted to
/// inner <= |y| <= outer. Cells near any of the radii that cut the integrand
/// use an n^d sub-cell midpoint rule.
double cell_weight(const JumpKernel& kernel, const Point& centre, double h, double inner, double outer,
                   double refine_radius, int subcells) {
  const int d = static_cast<int>(centre.size());
  const double r = centre.norm();
  const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(d));
  const double support = kernel.support_radius();
  auto straddles = [&](double radius) { return std::isfinite(radius) && std::abs(r - radius) <= half_diag; };
  const bool refine = r < refine_radius || straddles(inner) || straddles(outer) || straddles(support);
  if (!refine) {
    if (r < inner || r > outer) return 0.0;
    return kernel.profile(r) * std::pow(h, d);
  }
  const int n = subcells;
  const double sub = h / n;
  const double sub_volume = std::pow(sub, d);
  double total = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  const int count = static_cast<int>(std::pow(n, d));
  Point y(d);
  for (int m = 0; m < count; ++m) {
    int rest = m;
    for (int k = 0; k < d; ++k) {
      idx[static_cast<std::size_t>(k)] = rest % n;
      rest /= n;
      y(k) = centre(k) - 0.5 * h + (idx[static_cast<std::size_t>(k)] + 0.5) * sub;
    }
    const double ry = y.norm();
    if (ry >= inner && ry <= outer) total += kernel.profile(ry) * sub_volume;
  }
  return total;
}

ColMatrix to_col(const SparseMatrix& m) { return ColMatrix(m); }

/// Factorization of a grid system, picked by size and fill: dense for small
/// nonlocal systems whose stencil covers a large share of the grid, sparse
/// direct for moderate ones, preconditioned Krylov beyond that. `spd` means
/// the matrix itself is symmetric positive definite.
class Factorization {
 public:
  Factorization(const SparseMatrix& m, bool spd) {
    const ColMatrix a = to_col(m);
    const double n = static_cast<double>(a.rows());
    const double fill = static_cast<double>(a.nonZeros()) / (n * n);
    if (a.rows() <= kDenseMaxRows && fill >= kDenseFill) {
      const Eigen::MatrixXd dense(a);
      if (spd) {
        llt_.compute(dense);
        if (llt_.info() != Eigen::Success) throw NumericError("grid solve: matrix is not positive definite");
        kind_ = Kind::DenseCholesky;
      } else {
        // Singularity shows up in the residual check of the caller.
        lu_dense_.compute(dense);
        kind_ = Kind::DenseLU;
      }
    } else if (a.nonZeros() <= kDirectNonZeros) {
      if (spd) {
        ldlt_.compute(a);
        if (ldlt_.info() != Eigen::Success) throw NumericError("grid solve: LDLT factorization failed");
        kind_ = Kind::SparseCholesky;
      } else {
        lu_.analyzePattern(a);
        lu_.factorize(a);
        if (lu_.info() != Eigen::Success) throw NumericError("grid solve: LU factorization failed (singular system)");
        kind_ = Kind::SparseLU;
      }
    } else if (spd) {
      cg_.setTolerance(1e-13);
      cg_.setMaxIterations(20000);
      cg_.compute(a);
      kind_ = Kind::CG;
    } else {
      bicg_.setTolerance(1e-13);
      bicg_.setMaxIterations(20000);
      bicg_.compute(a);
      kind_ = Kind::BiCGSTAB;
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) {
    switch (kind_) {
      case Kind::DenseCholesky: return llt_.solve(b);
      case Kind::DenseLU: return lu_dense_.solve(b);
      case Kind::SparseCholesky: return ldlt_.solve(b);
      case Kind::SparseLU: return lu_.solve(b);
      case Kind::CG: {
        Eigen::VectorXd x = cg_.solve(b);
        iterations_ += static_cast<int>(cg_.iterations());
        return x;
      }
      case Kind::BiCGSTAB: {
        Eigen::VectorXd x = bicg_.solve(b);
        iterations_ += static_cast<int>(bicg_.iterations());
        return x;
      }
    }
    return {};
  }

  int iterations() const { return iterations_; }

 private:
  enum class Kind { DenseCholesky, DenseLU, SparseCholesky, SparseLU, CG, BiCGSTAB } kind_ = Kind::SparseLU;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_dense_;
  Eigen::SimplicialLDLT<ColMatrix> ldlt_;
  Eigen::SparseLU<ColMatrix> lu_;
  Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg_;
  Eigen::BiCGSTAB<ColMatrix, Eigen::IncompleteLUT<double>> bicg_;
  int iterations_ = 0;
};

/// Solves m x = b. With spd_negated, -m is symmetric positive definite.
Eigen::VectorXd linear_solve(const SparseMatrix& m, const Eigen::VectorXd& b, bool spd_negated, SolveReport* report) {
  Eigen::VectorXd x;
  int iterations = 0;
  if (spd_negated) {
    Factorization fact(-m, true);
    x = -fact.solve(b);
    iterations = fact.iterations();
  } else {
    Factorization fact(m, false);
    x = fact.solve(b);
    iterations = fact.iterations();
  }
  const double scale = std::max(b.norm(), 1e-300);
  const double residual = (m * x - b).norm() / scale;
  if (report) {
    report->residual = residual;
    report->iterations = iterations;
  }
  if (!(residual <= 1e-10) && b.norm() > 0.0) {
    std::ostringstream os;
    os << "grid solve did not converge: relative residual " << residual;
    throw NumericError(os.str());
  }
  return x;
}

SparseMatrix with_diagonal(const SparseMatrix& a, const Eigen::VectorXd& diag) {
  SparseMatrix m = a;
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.coeffRef(i, i) += diag(i);
  return m;
}

}  // namespace

std::size_t GridOperator::flat(const std::array<int, 3>& index) const {
  std::size_t f = 0;
  for (int k = dimension_ - 1; k >= 0; --k) {
    const auto kk = static_cast<std::size_t>(k);
    f = f * static_cast<std::size_t>(extent_[kk]) + static_cast<std::size_t>(index[kk] - lo_[kk]);
  }
  return f;
}

bool GridOperator::in_grid(const std::array<int, 3>& index) const {
  for (int k = 0; k < dimension_; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (index[kk] < lo_[kk] || index[kk] >= lo_[kk] + extent_[kk]) return false;
  }
  return true;
}

Point GridOperator::node(std::size_t i) const {
  Point x(dimension_);
  for (int k = 0; k < dimension_; ++k) x(k) = h_ * nodes_[i][static_cast<std::size_t>(k)];
  return x;
}

std::optional<std::size_t> GridOperator::interior_row(const std::array<int, 3>& index) const {
  if (!in_grid(index)) return std::nullopt;
  const int row = row_of_[flat(index)];
  if (row < 0) return std::nullopt;
  return static_cast<std::size_t>(row);
}

GridOperator assemble(const Domain& domain, const JumpKernel& kernel, const Field& c, double h,
                      const AssembleOptions& options) {
  if (!(h > 0.0)) throw ArgumentError("assemble: grid spacing h must be positive");
  if (domain.dimension() != kernel.dimension()) throw ArgumentError("assemble: domain and kernel dimensions differ");
  const int d = domain.dimension();
  GridOperator op(domain, kernel);
  op.dimension_ = d;
  op.h_ = h;
  op.far_field_ = options.far_field;
  op.r_max_ = options.r_max.value_or(default_r_max(domain, kernel, h));
  if (!kernel.is_zero() && op.r_max_ < 1.0) {
    throw ArgumentError("assemble: r_max must be at least 1 so the compensated band is represented");
  }

  // Nonlocal stencil: cells outside the 2h-ball up to the truncation radius.
  const double inner = 2.0 * h;
  const double reach = kernel.is_zero() ? 0.0 : std::min(op.r_max_, kernel.support_radius());
  std::map<std::array<int, 3>, double> stencil;
  Point drift_sum = Point::Zero(d);
  double drift_scale = 0.0;
  if (!kernel.is_zero()) {
    op.near_diffusion_ = kernel.second_moment_inside(inner) / (2.0 * d);
    op.kappa_tail_ = op.r_max_ < kernel.support_radius() ? kernel.mass_outside(op.r_max_) : 0.0;
    const int span = static_cast<int>(std::ceil(reach / h)) + 1;
    std::array<int, 3> s{0, 0, 0};
    const int width = 2 * span + 1;
    const long long count = static_cast<long long>(std::pow(width, d));
    Point y(d);
    for (long long m = 0; m < count; ++m) {
      long long rest = m;
      for (int k = 0; k < d; ++k) {
        s[static_cast<std::size_t>(k)] = static_cast<int>(rest % width) - span;
        rest /= width;
        y(k) = h * s[static_cast<std::size_t>(k)];
      }
      const double r = y.norm();
      if (r == 0.0 || r > reach + h * std::sqrt(static_cast<double>(d))) continue;
      const double w = cell_weight(kernel, y, h, inner, op.r_max_, options.refine_radius_cells * h,
                                   options.refine_subcells);
      if (w <= 0.0) continue;
      stencil[s] += w;
      if (r <= 1.0) drift_sum += w * y;
      drift_scale += w * r;
    }
  }
  // Local part: (1 + a) times the second-difference Laplacian.
  const double lap = (1.0 + op.near_diffusion_) / (h * h);
  for (int k = 0; k < d; ++k) {
    std::array<int, 3> e{0, 0, 0};
    e[static_cast<std::size_t>(k)] = 1;
    stencil[e] += lap;
    e[static_cast<std::size_t>(k)] = -1;
    stencil[e] += lap;
  }
  // Compensator -b_h . grad_h u; vanishes for symmetric stencils.
  if (drift_sum.norm() > 1e-12 * std::max(drift_scale, 1.0)) {
    op.symmetric_ = false;
    for (int k = 0; k < d; ++k) {
      std::array<int, 3> e{0, 0, 0};
      e[static_cast<std::size_t>(k)] = 1;
      stencil[e] -= drift_sum(k) / (2.0 * h);
      e[static_cast<std::size_t>(k)] = -1;
      stencil[e] += drift_sum(k) / (2.0 * h);
    }
  }
  double weight_total = 0.0;
  for (const auto& [shift, w] : stencil) {
    op.offsets_.push_back({shift, w});
    weight_total += w;
  }

  // Grid covering the domain plus the collar.
  const int pad = static_cast<int>(std::ceil(std::max(reach, h) / h)) + 2;
  for (int k = 0; k < d; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const int lo = static_cast<int>(std::floor(domain.bounds_lo()(k) / h)) - pad;
    const int hi = static_cast<int>(std::ceil(domain.bounds_hi()(k) / h)) + pad;
    op.lo_[kk] = lo;
    op.extent_[kk] = hi - lo + 1;
  }
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(op.extent_[static_cast<std::size_t>(k)]);
  op.row_of_.assign(total, -1);
  {
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t f = 0; f < total; ++f) {
      std::size_t rest = f;
      Point x(d);
      for (int k = 0; k < d; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        idx[kk] = op.lo_[kk] + static_cast<int>(rest % static_cast<std::size_t>(op.extent_[kk]));
        rest /= static_cast<std::size_t>(op.extent_[kk]);
        x(k) = h * idx[kk];
      }
      if (contains(domain, x)) {
        op.row_of_[f] = static_cast<int>(op.nodes_.size());
        op.nodes_.push_back(idx);
      }
    }
  }
  const std::size_t n = op.nodes_.size();
  if (n == 0) throw ArgumentError("assemble: no grid node lies inside the domain; reduce h");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * std::min(op.offsets_.size() + 1, n));
  op.collar_mass_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  op.c_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (const auto& o : op.offsets_) {
      std::array<int, 3> t = op.nodes_[i];
      for (int k = 0; k < d; ++k) t[static_cast<std::size_t>(k)] += o.shift[static_cast<std::size_t>(k)];
      const int col = op.row_of_[op.flat(t)];
      if (col >= 0) {
        triplets.emplace_back(row, col, o.weight);
      } else {
        op.collar_mass_(row) += o.weight;
      }
    }
    triplets.emplace_back(row, row, -weight_total - op.kappa_tail_);
    if (c) {
      const double ci = c(op.node(i));
      if (!std::isfinite(ci)) throw DataError("assemble: zeroth-order coefficient c is not finite");
      op.c_(row) = ci;
    }
  }
  op.matrix_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  op.matrix_.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix_.makeCompressed();
  return op;
}

Eigen::VectorXd GridOperator::exterior_load(const Field& g) const {
  Eigen::VectorXd load = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size()), kappa_tail_ * far_field_);
  if (!g) return load;
  Point x(dimension_);
  for (std::size_t i = 0; i < size(); ++i) {
    if (collar_mass_(static_cast<Eigen::Index>(i)) == 0.0) continue;
    CompensatedSum acc;
    for (const auto& o : offsets_) {
      std::array<int, 3> t = nodes_[i];
      for (int k = 0; k < dimension_; ++k) t[static_cast<std::size_t>(k)] += o.shift[static_cast<std::size_t>(k)];
      if (row_of_[flat(t)] >= 0) continue;
      for (int k = 0; k < dimension_; ++k) x(k) = h_ * t[static_cast<std::size_t>(k)];
      acc.add(o.weight * g(x));
    }
    load(static_cast<Eigen::Index>(i)) += acc.value();
  }
  return load;
}

Eigen::VectorXd GridOperator::apply(const Field& u) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  Point y(dimension_);
  for (std::size_t i = 0; i < size(); ++i) {
    const Point x = node(i);
    const double ux = u(x);
    CompensatedSum acc;
    for (const auto& o : offsets_) {
      for (int k = 0; k < dimension_; ++k) y(k) = x(k) + h_ * o.shift[static_cast<std::size_t>(k)];
      acc.add(o.weight * (u(y) - ux));
    }
    acc.add((c_(static_cast<Eigen::Index>(i)) - kappa_tail_) * ux);
    out(static_cast<Eigen::Index>(i)) = acc.value();
  }
  return out;
}

void GridOperator::write_triplets(std::ostream& os) const {
  os.precision(17);
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      const double v = it.value() + (it.col() == r ? c_(r) : 0.0);
      os << it.row() << ' ' << it.col() << ' ' << v << '\n';
    }
  }
}

double GridFunction::at_node(const std::array<int, 3>& index) const {
  if (auto row = op->interior_row(index)) return values(static_cast<Eigen::Index>(*row));
  if (!exterior) return 0.0;
  Point x(op->dimension());
  for (int k = 0; k < op->dimension(); ++k) x(k) = op->h() * index[static_cast<std::size_t>(k)];
  return exterior(x);
}

double GridFunction::interpolate(const Point& x) const {
  const int d = op->dimension();
  const double h = op->h();
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int k = 0; k < d; ++k) {
    const double s = x(k) / h;
    const double fl = std::floor(s);
    base[static_cast<std::size_t>(k)] = static_cast<int>(fl);
    frac[static_cast<std::size_t>(k)] = s - fl;
  }
  double value = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    std::array<int, 3> idx = base;
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const bool up = (corner >> k) & 1;
      idx[kk] += up ? 1 : 0;
      w *= up ? frac[kk] : 1.0 - frac[kk];
    }
    if (w != 0.0) value += w * at_node(idx);
  }
  return value;
}

void GridFunction::write_csv(std::ostream& os) const {
  const int d = op->dimension();
  for (int k = 0; k < d; ++k) os << 'x' << (k + 1) << ',';
  os << "value\n";
  os.precision(17);
  for (std::size_t i = 0; i < op->size(); ++i) {
    const Point x = op->node(i);
    for (int k = 0; k < d; ++k) os << x(k) << ',';
    os << values(static_cast<Eigen::Index>(i)) << '\n';
  }
}

GridFunction solve_dirichlet(const GridOperator& op, const Field& f, const Field& g, SolveReport* report,
                             bool allow_positive_c) {
  const Eigen::VectorXd& c = op.zeroth_order();
  if (!allow_positive_c && c.size() > 0 && c.maxCoeff() > 0.0) {
    throw ArgumentError("solve_dirichlet requires c <= 0 for solvability");
  }
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::VectorXd rhs = -op.exterior_load(g);
  if (f) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double fi = f(op.node(static_cast<std::size_t>(i)));
      if (!std::isfinite(fi)) throw DataError("solve_dirichlet: f is not finite");
      rhs(i) -= fi;
    }
  }
  const SparseMatrix m = with_diagonal(op.matrix(), c);
  const bool spd = op.symmetric() && !allow_positive_c;
  GridFunction u{&op, linear_solve(m, rhs, spd, report), g};
  return u;
}

Eigenpair principal_eigenpair(const GridOperator& op, double tolerance, int max_iterations) {
  const auto n = static_cast<Eigen::Index>(op.size());
  // M = -(A + c); the principal eigenvalue is the bottom of its spectrum.
  const SparseMatrix m = -with_diagonal(op.matrix(), op.zeroth_order());
  double gershgorin = kInf;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double diag = 0.0;
    double off = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() == r) {
        diag = it.value();
      } else {
        off += std::abs(it.value());
      }
    }
    gershgorin = std::min(gershgorin, diag - off);
  }
  const double shift = gershgorin - 0.1 * std::abs(gershgorin);
  SparseMatrix shifted = m;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  // The shift sits below the spectrum, so the shifted matrix is positive
  // definite whenever the operator is symmetric.
  Factorization fact(shifted, op.symmetric());
  auto solve = [&](const Eigen::VectorXd& b) { return fact.solve(b); };

  Eigen::VectorXd psi = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  Eigenpair result;
  double residual = kInf;
  double lambda = 0.0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    Eigen::VectorXd v = solve(psi);
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericError("principal_eigenpair: iteration broke down");
    psi = v / norm;
    const Eigen::VectorXd mpsi = m * psi;
    lambda = psi.dot(mpsi);
    residual = (mpsi - lambda * psi).norm();
    if (residual <= tolerance * std::max(1.0, std::abs(lambda))) break;
  }
  if (it == max_iterations) {
    std::ostringstream os;
    os << "principal_eigenpair stagnated: residual " << residual << " after " << max_iterations << " iterations";
    throw NumericError(os.str());
  }
  if (psi.sum() < 0.0) psi = -psi;
  result.perron_positive = (psi.array() > 0.0).all();
  psi /= psi.maxCoeff();
  result.lambda = lambda;
  result.residual = residual;
  result.iterations = it + 1;
  result.psi = GridFunction{&op, psi, {}};
  double best = kInf;
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double dist = (op.node(i) - op.domain().centroid()).norm();
    if (dist < best) {
      best = dist;
      result.value_at_centroid = psi(static_cast<Eigen::Index>(i));
    }
  }
  return result;
}

GridFunction solve_semilinear(const GridOperator& op, const Nonlinearity& f, const Eigen::VectorXd& u_init,
                              SemilinearReport* report, double tolerance, int max_iterations) {
  const auto n = static_cast<Eigen::Index>(op.size());
  if (u_init.size() != n) throw ArgumentError("solve_semilinear: initial guess has the wrong size");
  const SparseMatrix m = with_diagonal(op.matrix(), op.zeroth_order());
  auto residual_of = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd r = m * u;
    for (Eigen::Index i = 0; i < n; ++i) r(i) -= f.value(u(i));
    return r;
  };
  Eigen::VectorXd u = u_init;
  Eigen::VectorXd r = residual_of(u);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  int it = 0;
  for (; it < max_iterations && !(rnorm <= tolerance); ++it) {
    SparseMatrix jac = m;
    for (Eigen::Index i = 0; i < n; ++i) jac.coeffRef(i, i) -= f.derivative(u(i));
    Eigen::VectorXd step;
    try {
      step = linear_solve(jac, -r, false, nullptr);
    } catch (const NumericError&) {
      throw NumericError("solve_semilinear: singular Newton system; try a different initial guess or damping");
    }
    // Backtracking on the residual norm.
    double alpha = 1.0;
    Eigen::VectorXd trial;
    Eigen::VectorXd trial_r;
    double trial_norm = kInf;
    for (int k = 0; k < 30; ++k) {
      trial = u + alpha * step;
      trial_r = residual_of(trial);
      trial_norm = trial_r.lpNorm<Eigen::Infinity>();
      if (trial_norm < rnorm || trial_norm <= tolerance) break;
      alpha *= 0.5;
    }
    if (!(trial_norm < rnorm) && !(trial_norm <= tolerance)) break;
    u = trial;
    r = trial_r;
    rnorm = trial_norm;
  }
  if (report) {
    report->iterations = it;
    report->residual = rnorm;
  }
  if (!(rnorm <= tolerance)) {
    std::ostringstream os;
    os << "solve_semilinear diverged: residual " << rnorm << " after " << it
       << " Newton steps; try a different initial guess or damping";
    throw NumericError(os.str());
  }
  return GridFunction{&op, u, {}};
}

namespace {

double ball_radius(const Domain& domain, const char* what) {
  if (const Ball* b = domain.as_ball()) return b->radius;
  if (domain.kind() == ShapeKind::Interval) return 0.5 * (domain.bounds_hi()(0) - domain.bounds_lo()(0));
  throw ArgumentError(std::string(what) + " requires a ball domain");
}

}  // namespace

BoundaryDecayResult boundary_decay_check(const GridFunction& u, double band) {
  const GridOperator& op = *u.op;
  const double radius = ball_radius(op.domain(), "boundary_decay_check");
  const double lo = 2.0 * op.h();
  const double hi = band * radius;
  BoundaryDecayResult r;
  r.eta_lower = kInf;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double delta = boundary_distance(op.domain(), op.node(i));
    if (delta < lo || delta > hi) continue;
    const double value = u.values(static_cast<Eigen::Index>(i));
    const double ratio = value / delta;
    r.eta_lower = std::min(r.eta_lower, ratio);
    r.c_upper = std::max(r.c_upper, ratio);
    if (value > 0.0) {
      xs.push_back(std::log(delta));
      ys.push_back(std::log(value));
    }
    ++r.nodes;
  }
  if (r.nodes == 0) throw ArgumentError("boundary_decay_check: no nodes in the boundary band; reduce h");
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    r.exponent = sxx > 0.0 ? sxy / sxx : 1.0;
  } else {
    r.exponent = 1.0;
  }
  // u ~ delta^alpha with alpha < 1 would make u / delta blow up at the boundary.
  r.pass = r.eta_lower > 0.0 && std::isfinite(r.c_upper) && r.exponent >= 0.8;
  return r;
}

SymmetryResult symmetry_check(const GridFunction& u, double tolerance, std::optional<double> bin_width) {
  const GridOperator& op = *u.op;
  const double radius = ball_radius(op.domain(), "symmetry_check");
  if (op.domain().centroid().norm() > 1e-12) throw ArgumentError("symmetry_check requires a ball centred at 0");
  const double width = bin_width.value_or(op.h());
  const auto bins = static_cast<std::size_t>(std::ceil(radius / width)) + 1;
  std::vector<double> sum_r(bins, 0.0), sum_u(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  const double umax = u.values.cwiseAbs().maxCoeff();
  SymmetryResult result;
  if (!(umax > 0.0)) return result;
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double r = op.node(i).norm();
    const auto b = std::min(bins - 1, static_cast<std::size_t>(r / width));
    sum_r[b] += r;
    sum_u[b] += u.values(static_cast<Eigen::Index>(i));
    ++count[b];
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    result.bin_radius.push_back(sum_r[b] / static_cast<double>(count[b]));
    result.bin_mean.push_back(sum_u[b] / static_cast<double>(count[b]));
  }
  // Radial profile: piecewise linear through the bin means.
  auto profile = [&](double r) {
    const auto& rs = result.bin_radius;
    const auto& us = result.bin_mean;
    if (r <= rs.front()) return us.front();
    if (r >= rs.back()) {
      // The outer band has the steepest slope; continue the last segment.
      const std::size_t m = rs.size();
      if (m < 2) return us.back();
      return us[m - 1] + (us[m - 1] - us[m - 2]) / (rs[m - 1] - rs[m - 2]) * (r - rs[m - 1]);
    }
    const auto it = std::upper_bound(rs.begin(), rs.end(), r);
    const auto k = static_cast<std::size_t>(it - rs.begin());
    const double t = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
    return (1.0 - t) * us[k - 1] + t * us[k];
  };
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double dev = std::abs(u.values(static_cast<Eigen::Index>(i)) - profile(op.node(i).norm())) / umax;
    result.max_deviation = std::max(result.max_deviation, dev);
  }
  result.strictly_decreasing = true;
  for (std::size_t b = 1; b < result.bin_mean.size(); ++b) {
    if (!(result.bin_mean[b] < result.bin_mean[b - 1])) result.strictly_decreasing = false;
  }
  result.pass = result.max_deviation <= tolerance && result.strictly_decreasing;
  return result;
}

NarrowDomainScan narrow_domain_scan(const JumpKernel& kernel, const std::vector<double>& c_values,
                                    const std::vector<double>& widths, double h, const AssembleOptions& options) {
  const int d = kernel.dimension();
  NarrowDomainScan scan;
  scan.c_values = c_values;
  scan.widths = widths;
  const Field minus_one = constant_field(-1.0);
  AssembleOptions opts = options;
  opts.far_field = -1.0;
  for (double c : c_values) {
    if (!(c > 0.0)) throw ArgumentError("narrow_domain_scan: c values must be positive");
    std::vector<bool> row;
    double threshold = kInf;
    for (double w : widths) {
      Point lo = Point::Constant(d, -1.0);
      Point hi = Point::Constant(d, 1.0);
      lo(d - 1) = 0.0;
      hi(d - 1) = w;
      const Domain slab = Domain::box(lo, hi);
      const GridOperator op = assemble(slab, kernel, constant_field(c), h, opts);
      bool ok = false;
      try {
        const GridFunction u = solve_dirichlet(op, {}, minus_one, nullptr, true);
        ok = u.values.maxCoeff() <= 1e-12;
      } catch (const NumericError&) {
        ok = false;
      }
      row.push_back(ok);
      if (!ok && !std::isfinite(threshold)) threshold = w;
    }
    scan.sign_ok.push_back(row);
    scan.threshold.push_back(threshold);
  }
  return scan;
}

}  // namespace mixop
