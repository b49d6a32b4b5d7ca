#include "mixop/errors.hpp"
#include "mixop/geometry.hpp"
#include "mixop/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mixop;
using std::numbers::pi;

namespace {

Point vec(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p(i++) = x;
  return p;
}

const Domain unit_disk = Domain::ball(Point::Zero(2), 1.0);
const Domain unit_square = Domain::box(vec({0, 0}), vec({1, 1}));

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("contains: spec examples") {
    CHECK(contains(unit_disk, vec({0, 0})));
    CHECK_FALSE(contains(unit_disk, vec({1, 0})));
    CHECK_FALSE(contains(unit_square, vec({0.5, 1.5})));
  }

  TEST_CASE("volume: spec examples") {
    CHECK(volume(unit_disk) == doctest::Approx(pi).epsilon(1e-15));
    CHECK(volume(Domain::box(vec({0, 0}), vec({1, 2}))) == doctest::Approx(2.0));
    const Domain triangle = Domain::polygon({vec({0, 0}), vec({1, 0}), vec({0, 1})});
    CHECK(triangle.volume_std_error() > 0.0);
    CHECK(std::abs(volume(triangle) - 0.5) <= 4.0 * triangle.volume_std_error());
  }

  TEST_CASE("degenerate shapes are rejected") {
    CHECK_THROWS_AS(Domain::ball(Point::Zero(2), 0.0), ArgumentError);
    CHECK_THROWS_AS(Domain::box(vec({0, 0}), vec({1, 0})), ArgumentError);
    CHECK_THROWS_AS(Domain::interval(1.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(Domain::ellipsoid(Point::Zero(2), vec({1, -1})), ArgumentError);
  }

  TEST_CASE("equal_volume_ball: spec examples") {
    const double side = std::sqrt(pi);
    const Domain square = Domain::box(vec({0, 0}), vec({side, side}));
    const Domain b = equal_volume_ball(square);
    REQUIRE(b.as_ball() != nullptr);
    CHECK(b.as_ball()->radius == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.centroid().norm() == 0.0);
    CHECK(equal_volume_ball(unit_disk).as_ball()->radius == doctest::Approx(1.0).epsilon(1e-15));
    const Domain wide = equal_volume_ball(Domain::interval(-2, 2));
    CHECK(wide.bounds_lo()(0) == doctest::Approx(-2.0));
    CHECK(wide.bounds_hi()(0) == doctest::Approx(2.0));
  }

  TEST_CASE("equal_volume_ball preserves volume") {
    for (const Domain& d : {Domain::ellipsoid(vec({1, 2, 3}), vec({0.5, 1, 2})), Domain::box(vec({0, 0}), vec({3, 1})),
                            Domain::polygon({vec({0, 0}), vec({2, 0}), vec({2, 1}), vec({0, 1.5})})}) {
      CHECK(volume(equal_volume_ball(d)) == doctest::Approx(volume(d)).epsilon(1e-12));
    }
  }

  TEST_CASE("boundary_distance: spec examples") {
    CHECK(boundary_distance(unit_disk, vec({0.5, 0})) == doctest::Approx(0.5));
    CHECK(boundary_distance(unit_disk, vec({2, 0})) == doctest::Approx(-1.0));
    CHECK(boundary_distance(unit_square, vec({0.3, 0.4})) == doctest::Approx(0.3));
    CHECK(boundary_distance(Domain::ellipsoid(Point::Zero(2), vec({2, 1})), vec({0, 0})) == doctest::Approx(1.0));
  }

  TEST_CASE("contains iff boundary_distance > 0 on random points") {
    const std::vector<Domain> domains{
        unit_disk,
        unit_square,
        Domain::interval(-1, 2),
        Domain::ellipsoid(vec({0, 0, 0}), vec({1, 2, 0.5})),
        Domain::polygon({vec({0, 0}), vec({1, 0}), vec({0, 1})}),
        Domain::ball(vec({0.5, -0.5, 1}), 0.7),
    };
    CounterStream rng(11);
    for (const Domain& d : domains) {
      int inside = 0;
      for (int i = 0; i < 2000; ++i) {
        Point x(d.dimension());
        for (int k = 0; k < d.dimension(); ++k) {
          const double lo = d.bounds_lo()(k);
          const double hi = d.bounds_hi()(k);
          x(k) = lo - 0.2 * (hi - lo) + 1.4 * (hi - lo) * rng.uniform();
        }
        const bool in = contains(d, x);
        inside += in ? 1 : 0;
        CHECK(in == (boundary_distance(d, x) > 0.0));
      }
      CHECK(inside > 0);
    }
  }

  TEST_CASE("centroid of convex shapes is inside") {
    const Domain pentagon = Domain::polygon({vec({0, 0}), vec({2, 0}), vec({3, 1}), vec({1, 2}), vec({-0.5, 1})});
    CHECK(contains(pentagon, pentagon.centroid()));
    CHECK(contains(unit_square, unit_square.centroid()));
  }

  TEST_CASE("polytope volume error decreases like n^(-1/2)") {
    const std::vector<Point> tri{vec({0, 0}), vec({1, 0}), vec({0, 1})};
    PolytopeOptions small;
    small.volume_samples = 10'000;
    PolytopeOptions large;
    large.volume_samples = 1'000'000;
    const double ratio =
        Domain::polygon(tri, small).volume_std_error() / Domain::polygon(tri, large).volume_std_error();
    CHECK(ratio == doctest::Approx(10.0).epsilon(0.05));
  }

  TEST_CASE("exterior sphere labels and translation") {
    CHECK(unit_disk.exterior_sphere_condition());
    CHECK_FALSE(unit_square.exterior_sphere_condition());
    const Domain moved = unit_square.translated(vec({-0.5, -0.5}));
    CHECK(moved.centroid().norm() == doctest::Approx(0.0));
    CHECK(contains(moved, vec({0.49, -0.49})));
  }
}
