#include "mixop/geometry.hpp"

#include "mixop/errors.hpp"
#include "mixop/kernel.hpp"
#include "mixop/rng.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mixop {

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Ball: return "ball";
    case ShapeKind::Box: return "box";
    case ShapeKind::Interval: return "interval";
    case ShapeKind::Ellipsoid: return "ellipsoid";
    case ShapeKind::Polytope: return "polytope";
  }
  return "unknown";
}

namespace {

void check_dim(int d) {
  if (d < 1 || d > kMaxDimension) throw ArgumentError("domain dimension must be 1, 2 or 3");
}

// Signed distance to an ellipsoid. The closest boundary point is
// y_i = a_i^2 x_i / (a_i^2 + t); t solves sum (a_i x_i / (a_i^2 + t))^2 = 1.
double ellipsoid_distance(const Ellipsoid& e, const Point& x) {
  const Point p = (x - e.center).cwiseAbs();
  const Point& a = e.semi_axes;
  const double level = (p.array() / a.array()).square().sum();
  if (level == 0.0) return a.minCoeff();
  auto g = [&](double t) { return ((a.array() * p.array()) / (a.array().square() + t)).square().sum() - 1.0; };
  const double amin2 = a.array().square().minCoeff();
  double lo, hi;
  if (level < 1.0) {
    lo = -amin2 * (1.0 - 1e-15);
    hi = 0.0;
    // g is decreasing; if g(lo) < 0 the root sits on a degenerate axis.
    if (g(lo) < 0.0) lo = -amin2;
  } else {
    lo = 0.0;
    hi = a.maxCoeff() * p.norm() + 1.0;
    while (g(hi) > 0.0) hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  Point y = (a.array().square() * p.array() / (a.array().square() + t)).matrix();
  double dist = (p - y).norm();
  if (level < 1.0) {
    // Degenerate-axis fallback: distance along each axis is an upper bound.
    for (int i = 0; i < p.size(); ++i) {
      Point q = p;
      q(i) = 0.0;
      const double rest = (q.array() / a.array()).square().sum();
      if (rest < 1.0) dist = std::min(dist, a(i) * std::sqrt(1.0 - rest) - p(i));
    }
    return dist;
  }
  return -dist;
}

}  // namespace

Domain::Domain(ShapeKind kind, Shape shape) : kind_(kind), shape_(std::move(shape)) {}

Domain Domain::ball(Point center, double radius) {
  check_dim(static_cast<int>(center.size()));
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("ball radius must be positive and finite");
  if (center.size() == 1) {
    return Domain::interval(center(0) - radius, center(0) + radius);
  }
  Domain d(ShapeKind::Ball, Ball{center, radius});
  d.finalize({});
  return d;
}

Domain Domain::box(Point lo, Point hi) {
  check_dim(static_cast<int>(lo.size()));
  if (lo.size() != hi.size()) throw ArgumentError("box corners have different dimensions");
  if (!((hi - lo).minCoeff() > 0.0)) throw ArgumentError("degenerate box: every side must have positive length");
  Domain d(lo.size() == 1 ? ShapeKind::Interval : ShapeKind::Box, Box{lo, hi});
  d.finalize({});
  return d;
}

Domain Domain::interval(double a, double b) {
  Point lo(1), hi(1);
  lo << a;
  hi << b;
  return box(lo, hi);
}

Domain Domain::ellipsoid(Point center, Point semi_axes) {
  check_dim(static_cast<int>(center.size()));
  if (center.size() != semi_axes.size()) throw ArgumentError("ellipsoid centre and axes differ in dimension");
  if (!(semi_axes.minCoeff() > 0.0)) throw ArgumentError("degenerate ellipsoid: semi-axes must be positive");
  Domain d(ShapeKind::Ellipsoid, Ellipsoid{center, semi_axes});
  d.finalize({});
  return d;
}

Domain Domain::polytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets, const PolytopeOptions& options) {
  const int dim = static_cast<int>(normals.cols());
  check_dim(dim);
  if (normals.rows() != offsets.size() || normals.rows() < dim + 1) {
    throw ArgumentError("polytope needs at least d+1 half-spaces with matching offsets");
  }
  for (Eigen::Index i = 0; i < normals.rows(); ++i) {
    const double n = normals.row(i).norm();
    if (!(n > 0.0)) throw ArgumentError("polytope half-space has a zero normal");
    normals.row(i) /= n;
    offsets(i) /= n;
  }
  // Vertices: feasible intersections of d hyperplanes.
  std::vector<Point> vertices;
  const int m = static_cast<int>(normals.rows());
  std::vector<int> idx(static_cast<std::size_t>(dim));
  auto visit = [&](auto&& self, int start, int depth) -> void {
    if (depth == dim) {
      Eigen::MatrixXd a(dim, dim);
      Eigen::VectorXd b(dim);
      for (int r = 0; r < dim; ++r) {
        a.row(r) = normals.row(idx[static_cast<std::size_t>(r)]);
        b(r) = offsets(idx[static_cast<std::size_t>(r)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < dim) return;
      const Eigen::VectorXd v = lu.solve(b);
      if (((normals * v - offsets).array() <= 1e-9).all()) vertices.emplace_back(v);
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      self(self, i + 1, depth + 1);
    }
  };
  visit(visit, 0, 0);
  if (static_cast<int>(vertices.size()) < dim + 1) {
    throw ArgumentError("polytope is unbounded or degenerate (fewer than d+1 vertices)");
  }
  Domain d(ShapeKind::Polytope, Polytope{normals, offsets, vertices});
  d.finalize(options);
  return d;
}

Domain Domain::polygon(const std::vector<Point>& vertices, const PolytopeOptions& options) {
  if (vertices.size() < 3) throw ArgumentError("polygon needs at least three vertices");
  const Eigen::Index m = static_cast<Eigen::Index>(vertices.size());
  Eigen::MatrixXd normals(m, 2);
  Eigen::VectorXd offsets(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Point& p = vertices[static_cast<std::size_t>(i)];
    const Point& q = vertices[static_cast<std::size_t>((i + 1) % m)];
    if (p.size() != 2 || q.size() != 2) throw ArgumentError("polygon vertices must be 2-D");
    // Outward normal of a counter-clockwise edge.
    normals(i, 0) = q(1) - p(1);
    normals(i, 1) = -(q(0) - p(0));
    offsets(i) = normals(i, 0) * p(0) + normals(i, 1) * p(1);
  }
  return polytope(normals, offsets, options);
}

void Domain::finalize(const PolytopeOptions& options) {
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball>) {
          dimension_ = static_cast<int>(s.center.size());
          volume_ = unit_ball_volume(dimension_) * std::pow(s.radius, dimension_);
          centroid_ = s.center;
          diameter_ = 2.0 * s.radius;
          lo_ = s.center.array() - s.radius;
          hi_ = s.center.array() + s.radius;
        } else if constexpr (std::is_same_v<S, Box>) {
          dimension_ = static_cast<int>(s.lo.size());
          volume_ = (s.hi - s.lo).prod();
          centroid_ = 0.5 * (s.lo + s.hi);
          diameter_ = (s.hi - s.lo).norm();
          lo_ = s.lo;
          hi_ = s.hi;
        } else if constexpr (std::is_same_v<S, Ellipsoid>) {
          dimension_ = static_cast<int>(s.center.size());
          volume_ = unit_ball_volume(dimension_) * s.semi_axes.prod();
          centroid_ = s.center;
          diameter_ = 2.0 * s.semi_axes.maxCoeff();
          lo_ = s.center - s.semi_axes;
          hi_ = s.center + s.semi_axes;
        } else {
          dimension_ = static_cast<int>(s.normals.cols());
          lo_ = s.vertices.front();
          hi_ = s.vertices.front();
          for (const Point& v : s.vertices) {
            lo_ = lo_.cwiseMin(v);
            hi_ = hi_.cwiseMax(v);
            for (const Point& w : s.vertices) diameter_ = std::max(diameter_, (v - w).norm());
          }
          // Rejection sampling in the bounding box for volume and centroid.
          const double box_volume = (hi_ - lo_).prod();
          CounterStream stream = CounterStream::derive(options.seed, 0);
          std::size_t hits = 0;
          Point sum = Point::Zero(dimension_);
          Point x(dimension_);
          const std::size_t n = std::max<std::size_t>(options.volume_samples, 1);
          for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < dimension_; ++k) x(k) = lo_(k) + (hi_(k) - lo_(k)) * stream.uniform();
            if (((s.normals * x.matrix() - s.offsets).array() < 0.0).all()) {
              ++hits;
              sum += x;
            }
          }
          const double p = static_cast<double>(hits) / static_cast<double>(n);
          volume_ = box_volume * p;
          volume_std_error_ = box_volume * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
          if (hits > 0) {
            centroid_ = sum / static_cast<double>(hits);
          } else {
            centroid_ = 0.5 * (lo_ + hi_);
          }
        }
      },
      shape_);
  if (!(volume_ > 0.0)) throw ArgumentError("degenerate domain: volume is zero");
}

double Domain::inradius() const { return boundary_distance(*this, centroid_); }

bool Domain::exterior_sphere_condition() const {
  return kind_ == ShapeKind::Ball || kind_ == ShapeKind::Ellipsoid || kind_ == ShapeKind::Interval;
}

Domain Domain::translated(const Point& shift) const {
  if (shift.size() != dimension_) throw ArgumentError("translation dimension mismatch");
  Domain out = *this;
  std::visit(
      [&](auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball> || std::is_same_v<S, Ellipsoid>) {
          s.center += shift;
        } else if constexpr (std::is_same_v<S, Box>) {
          s.lo += shift;
          s.hi += shift;
        } else {
          s.offsets += s.normals * shift;
          for (Point& v : s.vertices) v += shift;
        }
      },
      out.shape_);
  out.centroid_ += shift;
  out.lo_ += shift;
  out.hi_ += shift;
  return out;
}

std::string Domain::describe() const {
  std::ostringstream os;
  const Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, ",", ",", "", "", "(", ")");
  os << to_string(kind_) << "[d=" << dimension_;
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball>) {
          os << ", center=" << s.center.transpose().format(fmt) << ", radius=" << s.radius;
        } else if constexpr (std::is_same_v<S, Box>) {
          os << ", lo=" << s.lo.transpose().format(fmt) << ", hi=" << s.hi.transpose().format(fmt);
        } else if constexpr (std::is_same_v<S, Ellipsoid>) {
          os << ", center=" << s.center.transpose().format(fmt) << ", axes=" << s.semi_axes.transpose().format(fmt);
        } else {
          os << ", faces=" << s.normals.rows();
        }
      },
      shape_);
  os << "]";
  return os.str();
}

bool contains(const Domain& domain, const Point& x) {
  if (const Ball* b = std::get_if<Ball>(&domain.shape_)) {
    return (x - b->center).squaredNorm() < b->radius * b->radius;
  }
  if (const Box* b = std::get_if<Box>(&domain.shape_)) {
    return (x.array() > b->lo.array()).all() && (x.array() < b->hi.array()).all();
  }
  if (const Ellipsoid* e = std::get_if<Ellipsoid>(&domain.shape_)) {
    return ((x - e->center).array() / e->semi_axes.array()).square().sum() < 1.0;
  }
  const Polytope& p = std::get<Polytope>(domain.shape_);
  return ((p.normals * x.matrix() - p.offsets).array() < 0.0).all();
}

double volume(const Domain& domain) { return domain.volume(); }

Domain equal_volume_ball(const Domain& domain) {
  const int d = domain.dimension();
  const double radius = std::pow(domain.volume() / unit_ball_volume(d), 1.0 / d);
  return Domain::ball(Point::Zero(d), radius);
}

double boundary_distance(const Domain& domain, const Point& x) {
  if (const Ball* b = std::get_if<Ball>(&domain.shape_)) {
    return b->radius - (x - b->center).norm();
  }
  if (const Box* b = std::get_if<Box>(&domain.shape_)) {
    const Point below = b->lo - x;
    const Point above = x - b->hi;
    const Point outside = below.cwiseMax(above);
    if ((outside.array() < 0.0).all()) return -outside.maxCoeff();
    return -outside.cwiseMax(0.0).norm();
  }
  if (const Ellipsoid* e = std::get_if<Ellipsoid>(&domain.shape_)) {
    return ellipsoid_distance(*e, x);
  }
  const Polytope& p = std::get<Polytope>(domain.shape_);
  return -(p.normals * x.matrix() - p.offsets).maxCoeff();
}

}  // namespace mixop
