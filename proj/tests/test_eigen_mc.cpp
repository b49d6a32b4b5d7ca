#include "mixop/eigen_mc.hpp"
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

EigenConfig eigen_config(std::uint64_t seed, double t_max = 10.0) {
  EigenConfig c;
  c.path.dt = 1e-3;
  c.path.bridge_correction = true;
  c.path.base_seed = seed;
  c.path.t_max = t_max;
  return c;
}

}  // namespace

TEST_SUITE("eigen_mc") {
  TEST_CASE("Brownian part on (-1, 1) decays at pi^2 / 4") {
    const auto e = estimate_lambda(Domain::interval(-1, 1), JumpKernel::zero(1), vec({0}), 20000, eigen_config(1));
    const double exact = pi * pi / 4.0;
    CHECK(std::abs(e.lambda_hat - exact) <= 3.0 * e.std_error + 0.01 * exact);
    CHECK(e.fit_r2 > 0.99);
    CHECK(e.approximants_verified);
    CHECK(e.fit_window.lo < e.fit_window.hi);
    CHECK(e.window_sensitivity < 0.05 * exact);
    CHECK(e.censored_fraction == 0.0);
  }

  TEST_CASE("interval scaling: (-2, 2) decays at pi^2 / 16") {
    const auto e = estimate_lambda(Domain::interval(-2, 2), JumpKernel::zero(1), vec({0}), 20000,
                                   eigen_config(2, 20.0));
    CHECK(e.lambda_hat == doctest::Approx(pi * pi / 16.0).epsilon(0.03));
  }

  TEST_CASE("window choice moves the estimate by less than its error") {
    EigenConfig narrow = eigen_config(3);
    narrow.s_upper = 0.3;
    narrow.s_lower = 0.05;
    const auto a = estimate_lambda(Domain::interval(-1, 1), JumpKernel::zero(1), vec({0}), 20000, eigen_config(3));
    const auto b = estimate_lambda(Domain::interval(-1, 1), JumpKernel::zero(1), vec({0}), 20000, narrow);
    CHECK(std::abs(a.lambda_hat - b.lambda_hat) <= 3.0 * std::max(a.std_error, b.std_error));
  }

  TEST_CASE("estimation errors") {
    CHECK_THROWS_AS(estimate_lambda(Domain::interval(-1, 1), JumpKernel::zero(1), vec({3}), 100, eigen_config(4)),
                    ArgumentError);
    // Nothing exits before t_max: no decay to fit.
    CHECK_THROWS_AS(estimate_lambda(Domain::interval(-1, 1), JumpKernel::zero(1), vec({0}), 200,
                                    eigen_config(4, 0.01)),
                    EstimationError);
    EigenConfig bad = eigen_config(4);
    bad.s_lower = 0.6;
    CHECK_THROWS_AS(estimate_lambda(Domain::interval(-1, 1), JumpKernel::zero(1), vec({0}), 200, bad), ArgumentError);
  }

  TEST_CASE("Faber-Krahn: a ball compared with itself passes") {
    const Domain disk = Domain::ball(Point::Zero(2), 1.0);
    const auto r = faber_krahn_compare(disk, JumpKernel::fractional(2, 0.5), 5000, eigen_config(5));
    CHECK(r.verdict);
    CHECK(r.ball_shape.volume() == doctest::Approx(disk.volume()));
  }

  TEST_CASE("Faber-Krahn: a square has the larger eigenvalue") {
    const Domain square = Domain::box(vec({-1, -1}), vec({1, 1}));
    const auto r = faber_krahn_compare(square, JumpKernel::zero(2), 10000, eigen_config(6));
    CHECK(r.verdict);
    CHECK(r.domain.lambda_hat > r.ball.lambda_hat);
    CHECK(r.domain.lambda_hat == doctest::Approx(pi * pi / 2.0).epsilon(0.05));
  }

  TEST_CASE("Faber-Krahn rejects a kernel that increases with radius") {
    const auto k = JumpKernel::tabulated(2, {0.1, 0.5, 1.0}, {1.0, 2.0, 3.0});
    CHECK_FALSE(k.radially_decreasing());
    const Domain disk = Domain::ball(Point::Zero(2), 1.0);
    CHECK_THROWS_AS(faber_krahn_compare(disk, k, 100, eigen_config(7)), HypothesisError);
    CHECK_THROWS_AS(survival_domination_check(disk, k, {0.1}, 100, eigen_config(7).path), HypothesisError);
  }

  TEST_CASE("survival domination: the ball against itself and a square") {
    const Domain disk = Domain::ball(vec({3, -1}), 1.0);
    const std::vector<double> t{0.05, 0.1, 0.2, 0.4};
    const auto same = survival_domination_check(disk, JumpKernel::zero(2), t, 4000, eigen_config(8).path);
    CHECK(same.verdict);
    const Domain square = Domain::box(vec({-1, -1}), vec({1, 1}));
    const auto sq = survival_domination_check(square, JumpKernel::zero(2), t, 4000, eigen_config(8).path);
    CHECK(sq.verdict);
    CHECK(sq.survival_domain.back() < sq.survival_ball.back());
  }

  TEST_CASE("eigenfunction identity with the exact interval eigenpair") {
    const Domain interval = Domain::interval(-1, 1);
    const GridOperator op = assemble(interval, JumpKernel::zero(1), {}, 0.01, {});
    const Eigenpair e = principal_eigenpair(op);
    const PathConfig c = eigen_config(9).path;
    const auto r = eigen_identity_residual(interval, JumpKernel::zero(1), e.psi, e.lambda, 0.5, 10000, c, 5);
    CHECK_FALSE(r.points.empty());
    CHECK(r.max_relative_deviation <= 0.05);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      CHECK(r.psi[i] == doctest::Approx(std::cos(pi * r.points[i](0) / 2.0)).epsilon(1e-3));
    }
    CHECK_THROWS_AS(eigen_identity_residual(interval, JumpKernel::zero(1), e.psi, e.lambda, c.t_max, 10, c),
                    ArgumentError);
    CHECK_THROWS_AS(eigen_identity_residual(interval, JumpKernel::zero(1), e.psi, e.lambda, 0.0, 10, c),
                    ArgumentError);
  }
}
