#include "mixop/kernel.hpp"

#include "mixop/errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mixop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dimension(int d) {
  if (d < 1 || d > kMaxDimension) {
    throw ArgumentError("kernel dimension must be 1, 2 or 3, got " + std::to_string(d));
  }
}

void check_order(double s) {
  // s = 1 is accepted so that levy_integrability can report the divergence.
  if (!(s > 0.0 && s <= 1.0)) {
    throw ArgumentError("fractional order s must lie in (0, 1], got " + std::to_string(s));
  }
}

/// 1 - (spherical average of cos(x e . w)) over unit directions w in R^d.
double one_minus_spherical_cos(int d, double x) {
  x = std::abs(x);
  const double x2 = x * x;
  switch (d) {
    case 1: {
      const double h = std::sin(0.5 * x);
      return 2.0 * h * h;
    }
    case 2:
      if (x < 1e-2) return x2 / 4.0 - x2 * x2 / 64.0 + x2 * x2 * x2 / 2304.0;
      return 1.0 - std::cyl_bessel_j(0.0, x);
    default:
      if (x < 1e-2) return x2 / 6.0 - x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0;
      return 1.0 - std::sin(x) / x;
  }
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Zero: return "zero";
    case KernelFamily::Fractional: return "fractional";
    case KernelFamily::TruncatedFractional: return "truncated-fractional";
    case KernelFamily::TemperedFractional: return "tempered-fractional";
    case KernelFamily::CompactBump: return "compact-bump";
    case KernelFamily::Tabulated: return "tabulated";
  }
  return "unknown";
}

double unit_sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
  }
  throw ArgumentError("dimension must be 1, 2 or 3");
}

double unit_ball_volume(int d) { return unit_sphere_area(d) / static_cast<double>(d); }

JumpKernel::JumpKernel(KernelFamily family, int dimension) : family_(family), dimension_(dimension) {
  check_dimension(dimension);
}

JumpKernel JumpKernel::zero(int dimension) { return JumpKernel(KernelFamily::Zero, dimension); }

JumpKernel JumpKernel::fractional(int dimension, double s) {
  check_order(s);
  JumpKernel k(KernelFamily::Fractional, dimension);
  k.s_ = s;
  return k;
}

JumpKernel JumpKernel::truncated_fractional(int dimension, double s, double truncation_radius) {
  check_order(s);
  if (!(truncation_radius > 0.0)) throw ArgumentError("truncation radius must be positive");
  JumpKernel k(KernelFamily::TruncatedFractional, dimension);
  k.s_ = s;
  k.truncation_radius_ = truncation_radius;
  return k;
}

JumpKernel JumpKernel::tempered_fractional(int dimension, double s, double tempering) {
  check_order(s);
  if (!(tempering > 0.0)) throw ArgumentError("tempering rate beta must be positive");
  JumpKernel k(KernelFamily::TemperedFractional, dimension);
  k.s_ = s;
  k.tempering_ = tempering;
  return k;
}

JumpKernel JumpKernel::compact_bump(int dimension, double positivity_radius) {
  if (!(positivity_radius > 0.0)) throw ArgumentError("bump positivity radius must be positive");
  JumpKernel k(KernelFamily::CompactBump, dimension);
  k.bump_radius_ = positivity_radius;
  return k;
}

JumpKernel JumpKernel::tabulated(int dimension, std::vector<double> radii, std::vector<double> values) {
  if (radii.size() < 2 || radii.size() != values.size()) {
    throw ArgumentError("tabulated kernel needs at least two (radius, value) pairs of equal length");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw ArgumentError("tabulated radii must be positive and strictly increasing");
    }
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw ArgumentError("tabulated values must be positive and finite");
    }
  }
  JumpKernel k(KernelFamily::Tabulated, dimension);
  k.radially_decreasing_ = std::is_sorted(values.rbegin(), values.rend());
  k.table_radii_ = std::move(radii);
  k.table_values_ = std::move(values);
  return k;
}

std::optional<double> JumpKernel::positivity_radius() const {
  switch (family_) {
    case KernelFamily::Zero: return std::nullopt;
    case KernelFamily::Fractional:
    case KernelFamily::TemperedFractional: return kInf;
    case KernelFamily::TruncatedFractional: return truncation_radius_;
    case KernelFamily::CompactBump: return bump_radius_;
    case KernelFamily::Tabulated: return table_radii_.back();
  }
  return std::nullopt;
}

double JumpKernel::support_radius() const {
  switch (family_) {
    case KernelFamily::Zero: return 0.0;
    case KernelFamily::Fractional:
    case KernelFamily::TemperedFractional: return kInf;
    case KernelFamily::TruncatedFractional: return truncation_radius_;
    case KernelFamily::CompactBump: return 2.0 * bump_radius_;
    case KernelFamily::Tabulated: return table_radii_.back();
  }
  return 0.0;
}

double JumpKernel::profile(double r) const {
  const double power = -static_cast<double>(dimension_) - 2.0 * s_;
  switch (family_) {
    case KernelFamily::Zero: return 0.0;
    case KernelFamily::Fractional: return std::pow(r, power);
    case KernelFamily::TruncatedFractional: return r <= truncation_radius_ ? std::pow(r, power) : 0.0;
    case KernelFamily::TemperedFractional: return std::pow(r, power) * std::exp(-tempering_ * r);
    case KernelFamily::CompactBump: {
      const double q = r / (2.0 * bump_radius_);
      if (q >= 1.0) return 0.0;
      return std::exp(1.0 - 1.0 / (1.0 - q * q));
    }
    case KernelFamily::Tabulated: {
      if (r <= table_radii_.front()) return table_values_.front();
      if (r > table_radii_.back()) return 0.0;
      const auto it = std::upper_bound(table_radii_.begin(), table_radii_.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - table_radii_.begin());
      const std::size_t lo = std::min(i, table_radii_.size() - 1) - 1;
      const double t = (r - table_radii_[lo]) / (table_radii_[lo + 1] - table_radii_[lo]);
      return std::exp((1.0 - t) * std::log(table_values_[lo]) + t * std::log(table_values_[lo + 1]));
    }
  }
  return 0.0;
}

std::vector<double> JumpKernel::breakpoints(double a, double b) const {
  std::vector<double> pts{a};
  auto add = [&](double p) {
    if (p > a && p < b) pts.push_back(p);
  };
  add(1.0);
  if (family_ == KernelFamily::Tabulated) {
    for (double r : table_radii_) add(r);
  }
  add(support_radius());
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double JumpKernel::shell_integral(const std::function<double(double)>& weight, double a, double b,
                                  const QuadratureConfig& cfg) const {
  if (is_zero()) return 0.0;
  b = std::min(b, support_radius());
  if (!(b > a)) return 0.0;
  const double area = unit_sphere_area(dimension_);
  const int d = dimension_;
  auto integrand = [&](double r) { return weight(r) * profile(r) * std::pow(r, d - 1); };

  const std::vector<double> pts = breakpoints(a, b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i];
    const double hi = pts[i + 1];
    if (lo == 0.0) {
      total += quad::inward_dyadic(integrand, hi, cfg).value;
    } else if (std::isinf(hi)) {
      total += quad::outward_dyadic(integrand, lo, cfg).value;
    } else {
      total += quad::finite(integrand, lo, hi, cfg).value;
    }
  }
  return area * total;
}

double JumpKernel::mass_outside(double r) const {
  if (!(r > 0.0)) throw ArgumentError("mass_outside needs a positive radius");
  const double area = unit_sphere_area(dimension_);
  switch (family_) {
    case KernelFamily::Zero: return 0.0;
    case KernelFamily::Fractional: return area * std::pow(r, -2.0 * s_) / (2.0 * s_);
    case KernelFamily::TruncatedFractional:
      if (r >= truncation_radius_) return 0.0;
      return area * (std::pow(r, -2.0 * s_) - std::pow(truncation_radius_, -2.0 * s_)) / (2.0 * s_);
    default: return shell_integral([](double) { return 1.0; }, r, kInf, QuadratureConfig{});
  }
}

double JumpKernel::second_moment_inside(double r) const {
  if (!(r > 0.0)) return 0.0;
  const double area = unit_sphere_area(dimension_);
  switch (family_) {
    case KernelFamily::Zero: return 0.0;
    case KernelFamily::Fractional:
      if (s_ >= 1.0) return kInf;
      return area * std::pow(r, 2.0 - 2.0 * s_) / (2.0 - 2.0 * s_);
    case KernelFamily::TruncatedFractional:
      if (s_ >= 1.0) return kInf;
      return area * std::pow(std::min(r, truncation_radius_), 2.0 - 2.0 * s_) / (2.0 - 2.0 * s_);
    default: return shell_integral([](double t) { return t * t; }, 0.0, r, QuadratureConfig{});
  }
}

std::string JumpKernel::describe() const {
  std::ostringstream os;
  os << to_string(family_) << "(d=" << dimension_;
  switch (family_) {
    case KernelFamily::Fractional: os << ", s=" << s_; break;
    case KernelFamily::TruncatedFractional: os << ", s=" << s_ << ", R_trunc=" << truncation_radius_; break;
    case KernelFamily::TemperedFractional: os << ", s=" << s_ << ", beta=" << tempering_; break;
    case KernelFamily::CompactBump: os << ", r0=" << bump_radius_; break;
    case KernelFamily::Tabulated: os << ", knots=" << table_radii_.size(); break;
    case KernelFamily::Zero: break;
  }
  os << ")";
  return os.str();
}

double evaluate(const JumpKernel& kernel, const Point& y) {
  if (y.size() != kernel.dimension()) throw ArgumentError("evaluate: point dimension does not match kernel");
  const double r = y.norm();
  if (r == 0.0) throw ArgumentError("evaluate: jump kernel is singular at y = 0");
  return kernel.profile(r);
}

IntegrabilityReport levy_integrability(const JumpKernel& kernel, const IntegrabilityConfig& cfg) {
  IntegrabilityReport report;
  if (kernel.is_zero()) return report;

  const int d = kernel.dimension();
  const double area = unit_sphere_area(d);
  auto near = [&](double r) { return r * r * kernel.profile(r) * std::pow(r, d - 1); };
  auto tail = [&](double r) { return kernel.profile(r) * std::pow(r, d - 1); };

  // Dyadic shells towards 0 (near piece) and towards infinity (tail piece).
  // Shell sums of power-law pieces are geometric; a shell ratio that does
  // not settle below one over three successive halvings signals divergence.
  auto series = [&](auto&& integrand, bool inward, double& out) -> bool {
    double total = 0.0;
    double prev = 0.0;
    int stalled = 0;
    for (int k = 0; k < cfg.max_shells; ++k) {
      const double lo = inward ? std::ldexp(1.0, -k - 1) : std::ldexp(1.0, k);
      const double hi = 2.0 * lo;
      if (!inward && lo >= kernel.support_radius()) break;
      const double shell = quad::finite(integrand, lo, std::min(hi, inward ? hi : kernel.support_radius()),
                                        cfg.quadrature).value * area;
      total += shell;
      if (prev > 0.0 && shell > 0.0) {
        const double ratio = shell / prev;
        stalled = ratio >= 0.999 ? stalled + 1 : 0;
        if (stalled >= 3) {
          std::ostringstream os;
          os << (inward ? "near-origin" : "tail") << " piece diverges: shell ratio " << ratio
             << " after " << k + 1 << " halvings";
          report.diagnostic = os.str();
          return false;
        }
        if (shell <= 1e-3 * cfg.quadrature.rel_tol * total) break;
        if (k >= 6 && ratio < 0.999) {
          const double remainder = shell * ratio / (1.0 - ratio);
          if (remainder <= 1e-3 * cfg.quadrature.rel_tol * total || k + 1 == cfg.max_shells) {
            total += remainder;
            break;
          }
        }
      } else if (prev > 0.0 && shell == 0.0) {
        break;
      }
      prev = shell;
      if (total > cfg.divergence_threshold) {
        report.diagnostic = std::string(inward ? "near-origin" : "tail") + " piece exceeds divergence threshold";
        return false;
      }
    }
    out = total;
    if (total > cfg.divergence_threshold) {
      report.diagnostic = std::string(inward ? "near-origin" : "tail") + " piece exceeds divergence threshold";
      return false;
    }
    return true;
  };

  if (!series(near, true, report.near_piece) || !series(tail, false, report.tail_piece)) {
    report.finite = false;
    report.value = kInf;
    return report;
  }
  report.value = report.near_piece + report.tail_piece;
  return report;
}

std::complex<double> symbol(const JumpKernel& kernel, const Point& z, const QuadratureConfig& cfg) {
  if (z.size() != kernel.dimension()) throw ArgumentError("symbol: frequency dimension does not match kernel");
  const double zn = z.norm();
  if (kernel.is_zero() || zn == 0.0) return {0.0, 0.0};
  const int d = kernel.dimension();
  const double s = kernel.s();

  if (kernel.family() == KernelFamily::Fractional) {
    if (s >= 1.0) throw NumericError("symbol: kernel is not a Lévy density (s >= 1)");
    // int (1 - cos(z.y)) |y|^{-d-2s} dy = pi^{d/2} Gamma(1-s) / (s 4^s Gamma(d/2+s)) |z|^{2s}
    const double c = std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(1.0 - s) /
                     (s * std::pow(4.0, s) * std::tgamma(0.5 * d + s));
    return {c * std::pow(zn, 2.0 * s), 0.0};
  }

  // Symmetric radial kernel: the compensator integrates to zero and psi is
  // the radial integral of 1 - (spherical average of cos).
  const double support = kernel.support_radius();
  const double period = 2.0 * std::numbers::pi / zn;
  auto weight = [&](double r) { return one_minus_spherical_cos(d, zn * r); };

  double value = 0.0;
  const double first = std::min({1.0, support, period});
  value += kernel.shell_integral(weight, 0.0, first, cfg);
  if (std::isfinite(support)) {
    // Integrate whole oscillation periods to keep each panel smooth.
    double lo = first;
    while (lo < support) {
      const double hi = std::min(support, lo + period);
      value += kernel.shell_integral(weight, lo, hi, cfg);
      lo = hi;
    }
  } else {
    // Unbounded support (tempered): periods up to the radius where the
    // remaining mass is negligible, then the weight averages to one.
    double lo = first;
    const double target = cfg.rel_tol * std::max(value, 1e-300);
    int panels = 0;
    while (kernel.mass_outside(lo) > target) {
      const double hi = lo + std::max(period, 0.25 * lo);
      value += kernel.shell_integral(weight, lo, hi, cfg);
      lo = hi;
      if (++panels > 100000) {
        std::ostringstream os;
        os << "symbol quadrature did not converge: remaining mass " << kernel.mass_outside(lo)
           << " exceeds tolerance " << target;
        throw NumericError(os.str());
      }
    }
    value += kernel.mass_outside(lo);
  }
  return {value, 0.0};
}

namespace {

std::vector<Point> sphere_directions(int d, int count) {
  std::vector<Point> dirs;
  if (d == 1) {
    Point p(1);
    p << 1.0;
    dirs.push_back(p);
    p << -1.0;
    dirs.push_back(p);
    return dirs;
  }
  if (d == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * i / count;
      Point p(2);
      p << std::cos(a), std::sin(a);
      dirs.push_back(p);
    }
    return dirs;
  }
  // Fibonacci lattice on S^2.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double zc = 1.0 - 2.0 * (i + 0.5) / count;
    const double rho = std::sqrt(1.0 - zc * zc);
    Point p(3);
    p << rho * std::cos(golden * i), rho * std::sin(golden * i), zc;
    dirs.push_back(p);
  }
  return dirs;
}

}  // namespace

A1Report check_A1(const JumpKernel& kernel, const std::vector<double>& radii, const A1Config& cfg) {
  A1Report report;
  report.radii = radii;
  report.pass = !radii.empty();
  const auto dirs = sphere_directions(kernel.dimension(), std::max(cfg.directions, 1));
  for (double r : radii) {
    if (!(r > 0.0)) throw ArgumentError("check_A1: radii must be positive");
    double inf = kInf;
    double sup = -kInf;
    for (const Point& w : dirs) {
      const Point p = r * w;
      const std::complex<double> psi = symbol(kernel, p, cfg.quadrature);
      const double re = r * r + psi.real();
      inf = std::min(inf, re);
      sup = std::max(sup, re);
      const double denom = r * r + std::abs(psi.real());
      report.im_ratio_max = std::max(report.im_ratio_max, std::abs(psi.imag()) / denom);
    }
    report.re_inf_per_radius.push_back(inf);
    report.re_sup_per_radius.push_back(sup);
    if (!(sup > 0.0)) report.pass = false;
  }
  if (!(report.im_ratio_max <= cfg.ratio_threshold) || !std::isfinite(report.im_ratio_max)) report.pass = false;
  return report;
}

SmallJumpStats small_jump_stats(const JumpKernel& kernel, double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1.0) {
    throw ArgumentError("small_jump_stats: epsilon must lie in (0, 1]");
  }
  const int d = kernel.dimension();
  SmallJumpStats stats;
  stats.epsilon = epsilon;
  stats.small_cov = Covariance::Zero(d, d);
  stats.compensator_drift = Point::Zero(d);
  if (kernel.is_zero()) return stats;
  stats.big_rate = kernel.mass_outside(epsilon);
  // Isotropy: Sigma_eps = (1/d) int_{|y|<=eps} |y|^2 j dy * I, and the odd
  // integrand of b_eps vanishes.
  const double second = kernel.second_moment_inside(epsilon);
  stats.small_cov.diagonal().setConstant(second / static_cast<double>(d));
  return stats;
}

Point random_direction(int d, CounterStream& stream) {
  Point p(d);
  if (d == 1) {
    p << (stream.uniform() < 0.5 ? -1.0 : 1.0);
    return p;
  }
  if (d == 2) {
    const double a = 2.0 * std::numbers::pi * stream.uniform();
    p << std::cos(a), std::sin(a);
    return p;
  }
  double a, b;
  stream.normal_pair(a, b);
  p << a, b, stream.normal();
  return p / p.norm();
}

BigJumpSampler::BigJumpSampler(const JumpKernel& kernel, double epsilon)
    : kernel_(&kernel), epsilon_(epsilon), rate_(0.0) {
  if (!(epsilon > 0.0)) throw ArgumentError("BigJumpSampler: epsilon must be positive");
  if (kernel.is_zero()) return;
  rate_ = kernel.mass_outside(epsilon);
  const int d = kernel.dimension();
  const double support = kernel.support_radius();

  if (kernel.family() == KernelFamily::CompactBump || kernel.family() == KernelFamily::Tabulated) {
    // Piecewise-constant envelope of the radial density j(r) r^{d-1}.
    std::vector<double> knots{epsilon};
    if (kernel.family() == KernelFamily::Tabulated) {
      for (double r : kernel.table_radii()) {
        if (r > epsilon) knots.push_back(r);
      }
    } else {
      const int pieces = 32;
      for (int i = 1; i <= pieces; ++i) {
        const double r = epsilon + (support - epsilon) * i / pieces;
        if (r > epsilon) knots.push_back(r);
      }
    }
    if (knots.back() < support) knots.push_back(support);
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      const double lo = knots[i];
      const double hi = knots[i + 1];
      if (!(hi > lo)) continue;
      // Both families are monotone on each piece, so the endpoint maximum of j
      // times hi^{d-1} bounds the radial density.
      const double jmax = std::max(kernel.profile(lo), kernel.profile(std::nextafter(hi, lo)));
      const double bound = jmax * std::pow(hi, d - 1);
      if (bound <= 0.0) continue;
      seg_lo_.push_back(lo);
      seg_hi_.push_back(hi);
      seg_bound_.push_back(bound);
      cum += bound * (hi - lo);
      seg_cdf_.push_back(cum);
    }
    for (double& c : seg_cdf_) c /= cum;
  }
}

double BigJumpSampler::sample_radius(CounterStream& stream) const {
  if (!(rate_ > 0.0)) throw std::logic_error("sample_big_jump: no jump mass beyond epsilon");
  const JumpKernel& k = *kernel_;
  const double two_s = 2.0 * k.s();
  const double eps = epsilon_;
  switch (k.family()) {
    case KernelFamily::Fractional:
      return eps * std::pow(stream.uniform(), -1.0 / two_s);
    case KernelFamily::TruncatedFractional: {
      const double a = std::pow(eps, -two_s);
      const double b = std::pow(k.truncation_radius(), -two_s);
      return std::pow(a - stream.uniform() * (a - b), -1.0 / two_s);
    }
    case KernelFamily::TemperedFractional:
      for (;;) {
        const double r = eps * std::pow(stream.uniform(), -1.0 / two_s);
        if (stream.uniform() < std::exp(-k.tempering() * (r - eps))) return r;
      }
    default: {
      const int d = k.dimension();
      for (;;) {
        const double u = stream.uniform();
        const std::size_t i = static_cast<std::size_t>(
            std::lower_bound(seg_cdf_.begin(), seg_cdf_.end(), u) - seg_cdf_.begin());
        const std::size_t seg = std::min(i, seg_cdf_.size() - 1);
        const double r = seg_lo_[seg] + (seg_hi_[seg] - seg_lo_[seg]) * stream.uniform();
        const double density = k.profile(r) * std::pow(r, d - 1);
        if (stream.uniform() * seg_bound_[seg] < density) return r;
      }
    }
  }
}

Point BigJumpSampler::sample(CounterStream& stream) const {
  const double r = sample_radius(stream);
  return r * random_direction(kernel_->dimension(), stream);
}

Point sample_big_jump(const JumpKernel& kernel, double epsilon, CounterStream& stream) {
  return BigJumpSampler(kernel, epsilon).sample(stream);
}

}  // namespace mixop
