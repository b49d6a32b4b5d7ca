#include "mixop/dirichlet_mc.hpp"
#include "mixop/errors.hpp"

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
const Domain interval = Domain::interval(-1.0, 1.0);

PathConfig config(double dt, std::uint64_t seed, bool bridge = true) {
  PathConfig c;
  c.dt = dt;
  c.bridge_correction = bridge;
  c.base_seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("dirichlet_mc") {
  TEST_CASE("constant payoff is reproduced exactly") {
    const auto r = solve_at(unit_disk, {}, constant_field(7.0), vec({0.2, 0.3}), JumpKernel::fractional(2, 0.5), 500,
                            config(1e-3, 1));
    CHECK(r.mean == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(r.std_error == 0.0);
    CHECK(r.n_effective + r.censored_count == 500);
    CHECK(r.ci95.contains(r.mean));
  }

  TEST_CASE("harmonic exterior data x1 at (0.3, 0)") {
    const Field g = [](const Point& x) { return x(0); };
    const auto r = solve_at(unit_disk, {}, g, vec({0.3, 0}), JumpKernel::zero(2), 20000, config(1e-3, 2));
    CHECK(std::abs(r.mean - 0.3) <= 3.0 * r.std_error);
  }

  TEST_CASE("mean exit time at the disk centre") {
    const auto r = solve_at(unit_disk, constant_field(1.0), constant_field(0.0), Point::Zero(2), JumpKernel::zero(2),
                            20000, config(1e-3, 3));
    CHECK(std::abs(r.mean - 0.25) <= 3.0 * r.std_error + 0.01);
  }

  TEST_CASE("all paths censored is an estimation error") {
    PathConfig c = config(1e-3, 4);
    c.t_max = 2e-3;
    CHECK_THROWS_AS(solve_at(unit_disk, {}, constant_field(1.0), Point::Zero(2), JumpKernel::zero(2), 100, c),
                    EstimationError);
  }

  TEST_CASE("censoring reports a bias bound") {
    PathConfig c = config(1e-3, 5);
    c.t_max = 0.2;
    const auto r = solve_at(unit_disk, constant_field(1.0), constant_field(2.0), Point::Zero(2), JumpKernel::zero(2),
                            2000, c);
    CHECK(r.censored_count > 0);
    CHECK(r.censoring_bias_bound > 0.0);
    CHECK(r.n_effective + r.censored_count == 2000);
  }

  TEST_CASE("linearity and positivity with shared seeds") {
    const auto k = JumpKernel::fractional(1, 0.5);
    const Field f = [](const Point& x) { return 1.0 + x(0) * x(0); };
    const Field g = [](const Point& x) { return std::abs(x(0)); };
    const Field sum_f = [&](const Point& x) { return 3.0 * f(x); };
    const Field sum_g = [&](const Point& x) { return 3.0 * g(x); };
    const auto a = solve_at(interval, f, g, vec({0.1}), k, 3000, config(1e-3, 6));
    const auto b = solve_at(interval, sum_f, sum_g, vec({0.1}), k, 3000, config(1e-3, 6));
    CHECK(b.mean == doctest::Approx(3.0 * a.mean).epsilon(1e-12));
    CHECK(a.mean >= 0.0);
    const std::pair<Field, Field> data[] = {{f, {}}, {{}, g}};
    const auto parts = solve_at_shared(interval, data, vec({0.1}), k, 3000, config(1e-3, 6));
    CHECK(parts[0].mean + parts[1].mean == doctest::Approx(a.mean).epsilon(1e-12));
  }

  TEST_CASE("exit moments on the interval") {
    const auto m = exit_moments(interval, vec({0}), JumpKernel::zero(1), 2, 20000, config(1e-3, 7), {});
    REQUIRE(m.moments.size() == 2);
    CHECK(std::abs(m.moments[0].mean - 0.5) <= 3.0 * m.moments[0].std_error + 0.01);
    CHECK(m.verdict);
    CHECK_FALSE(m.lower_bounds);
    CHECK_THROWS_AS(exit_moments(interval, vec({0}), JumpKernel::zero(1), 5, 10, config(1e-3, 7), {}),
                    ArgumentError);
  }

  TEST_CASE("exit moments under censoring are lower bounds") {
    PathConfig c = config(1e-3, 8);
    c.t_max = 0.3;
    const auto m = exit_moments(interval, vec({0}), JumpKernel::zero(1), 2, 2000, c, {});
    CHECK(m.lower_bounds);
    CHECK(m.moments[0].censored_count > 0);
  }

  TEST_CASE("ABP ratio for f = 1 on the unit disk") {
    const auto r = abp_ratio(unit_disk, constant_field(1.0), 2.0, JumpKernel::zero(2), 9, 2000, config(1e-3, 9));
    CHECK(r.lp_norm_f == doctest::Approx(std::sqrt(pi)).epsilon(1e-3));
    // sup u = 1/4 at the centre; lattice points lie within a cell of it.
    CHECK(r.ratio == doctest::Approx(0.25 / std::sqrt(pi)).epsilon(0.06));
    const Field ten = constant_field(10.0);
    const auto s = abp_ratio(unit_disk, ten, 2.0, JumpKernel::zero(2), 9, 2000, config(1e-3, 9));
    CHECK(s.ratio == doctest::Approx(r.ratio).epsilon(1e-12));
    CHECK_THROWS_AS(abp_ratio(unit_disk, ten, 1.0, JumpKernel::zero(2), 9, 10, config(1e-3, 9)), HypothesisError);
  }

  TEST_CASE("ABP ratio grows with the radius") {
    double previous = 0.0;
    for (double radius : {0.5, 1.0, 2.0}) {
      const Domain ball = Domain::ball(Point::Zero(2), radius);
      const auto r = abp_ratio(ball, constant_field(1.0), 2.0, JumpKernel::zero(2), 5, 1000, config(1e-3, 10));
      CHECK(r.ratio > previous);
      previous = r.ratio;
    }
  }

  TEST_CASE("comparison principle checks") {
    const auto constant = comparison_check(unit_disk, constant_field(2.0), JumpKernel::fractional(2, 0.5), 4, 200,
                                           config(1e-3, 11));
    CHECK(constant.pass);
    CHECK(constant.max_interior == doctest::Approx(2.0));
    const Field half_space = [](const Point& x) { return x(0) > 1.5 ? 1.0 : 0.0; };
    const auto far = comparison_check(unit_disk, half_space, JumpKernel::fractional(2, 0.5), 4, 500,
                                      config(1e-3, 12));
    CHECK(far.pass);
    for (const auto& e : far.estimates) {
      CHECK(e.mean >= 0.0);
      CHECK(e.mean <= 1.0);
    }
    const Field sine = [](const Point& x) { return std::sin(x(0)); };
    CHECK(comparison_check(interval, sine, JumpKernel::fractional(1, 0.5), 7, 1000, config(1e-3, 13)).pass);
  }

  TEST_CASE("start lattice respects the boundary margin") {
    const auto pts = start_lattice(unit_disk, 9, 0.1);
    CHECK_FALSE(pts.empty());
    for (const auto& p : pts) CHECK(boundary_distance(unit_disk, p) > 0.1);
  }
}
