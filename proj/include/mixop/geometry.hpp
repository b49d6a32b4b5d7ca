#pragma once

#include "mixop/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mixop {

enum class ShapeKind { Ball, Box, Interval, Ellipsoid, Polytope };

std::string to_string(ShapeKind kind);

struct Ball {
  Point center;
  double radius;
};

/// Axis-aligned box; a 1-D box is an interval.
struct Box {
  Point lo;
  Point hi;
};

struct Ellipsoid {
  Point center;
  Point semi_axes;
};

/// Convex polytope {x : normals.row(i) . x < offsets(i)} with unit normals.
struct Polytope {
  Eigen::MatrixXd normals;
  Eigen::VectorXd offsets;
  std::vector<Point> vertices;
};

struct PolytopeOptions {
  std::size_t volume_samples = 1'000'000;
  std::uint64_t seed = 0x5EED;
};

/// Bounded open domain. Boundary points count as exterior.
class Domain {
 public:
  static Domain ball(Point center, double radius);
  static Domain box(Point lo, Point hi);
  static Domain interval(double a, double b);
  static Domain ellipsoid(Point center, Point semi_axes);
  static Domain polytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets, const PolytopeOptions& options = {});
  /// Convex polygon from counter-clockwise vertices.
  static Domain polygon(const std::vector<Point>& vertices, const PolytopeOptions& options = {});

  ShapeKind kind() const { return kind_; }
  int dimension() const { return dimension_; }

  const Ball* as_ball() const { return std::get_if<Ball>(&shape_); }
  const Box* as_box() const { return std::get_if<Box>(&shape_); }
  const Ellipsoid* as_ellipsoid() const { return std::get_if<Ellipsoid>(&shape_); }
  const Polytope* as_polytope() const { return std::get_if<Polytope>(&shape_); }

  double volume() const { return volume_; }
  /// Zero for shapes with exact volume.
  double volume_std_error() const { return volume_std_error_; }
  const Point& centroid() const { return centroid_; }
  double diameter() const { return diameter_; }
  const Point& bounds_lo() const { return lo_; }
  const Point& bounds_hi() const { return hi_; }
  /// Radius of the largest inscribed ball around the centroid.
  double inradius() const;

  /// Balls, ellipsoids and intervals satisfy the uniform exterior sphere
  /// condition; boxes and polytopes have corners and do not.
  bool exterior_sphere_condition() const;

  Domain translated(const Point& shift) const;
  std::string describe() const;

 private:
  using Shape = std::variant<Ball, Box, Ellipsoid, Polytope>;
  Domain(ShapeKind kind, Shape shape);
  void finalize(const PolytopeOptions& options);

  ShapeKind kind_;
  Shape shape_;
  int dimension_ = 0;
  double volume_ = 0.0;
  double volume_std_error_ = 0.0;
  double diameter_ = 0.0;
  Point centroid_;
  Point lo_;
  Point hi_;

  friend bool contains(const Domain&, const Point&);
  friend double boundary_distance(const Domain&, const Point&);
};

/// Strict interior membership.
bool contains(const Domain& domain, const Point& x);

double volume(const Domain& domain);

/// Ball centred at the origin with the same volume.
Domain equal_volume_ball(const Domain& domain);

/// Signed Euclidean distance to the boundary, positive inside. Exterior values
/// for polytopes use the supporting-hyperplane bound.
double boundary_distance(const Domain& domain, const Point& x);

}  // namespace mixop
