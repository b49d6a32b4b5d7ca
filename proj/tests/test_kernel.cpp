#include "mixop/errors.hpp"
#include "mixop/kernel.hpp"
#include "mixop/rng.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace mixop;
using std::numbers::pi;

namespace {

Point vec(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p(i++) = x;
  return p;
}

// 1-D tempered symbol in closed form:
// 2 int_0^inf (1 - cos zr) r^{-1-a} e^{-beta r} dr = 2 Gamma(-a) (beta^a - Re (beta - i z)^a).
double tempered_symbol_1d(double s, double beta, double z) {
  const double a = 2.0 * s;
  const double modulus = std::pow(beta * beta + z * z, 0.5 * a);
  return 2.0 * std::tgamma(-a) * (std::pow(beta, a) - modulus * std::cos(a * std::atan2(z, beta)));
}

// Fractional symbol in d = 1 by an independent oscillatory quadrature:
// 2 int_0^inf (1 - cos zy) y^{-1-2s} dy split at y = 1.
double fractional_symbol_oracle(double s, double z) {
  using boost::math::quadrature::gauss_kronrod;
  const double near = gauss_kronrod<double, 61>::integrate(
      [&](double y) { return y > 0 ? (1.0 - std::cos(z * y)) * std::pow(y, -1.0 - 2.0 * s) : 0.0; }, 0.0, 1.0, 15,
      1e-12);
  const double tail_mass = 1.0 / (2.0 * s);  // int_1^inf y^{-1-2s}
  boost::math::quadrature::ooura_fourier_cos<double> cosine;
  // int_1^inf cos(zy) y^{-1-2s} dy = int_0^inf cos(z(u+1)) (u+1)^{-1-2s} du
  //   = cos z * C - sin z * S with C, S Fourier integrals in u.
  boost::math::quadrature::ooura_fourier_sin<double> sine;
  const auto g = [&](double u) { return std::pow(u + 1.0, -1.0 - 2.0 * s); };
  const double c = cosine.integrate(g, z).first;
  const double sn = sine.integrate(g, z).first;
  const double tail_cos = std::cos(z) * c - std::sin(z) * sn;
  return 2.0 * (near + tail_mass - tail_cos);
}

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace

TEST_SUITE("kernel_models") {
  TEST_CASE("evaluate: spec examples") {
    CHECK(evaluate(JumpKernel::zero(2), vec({1, 0})) == 0.0);
    CHECK(evaluate(JumpKernel::fractional(1, 0.5), vec({2})) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(evaluate(JumpKernel::compact_bump(2, 1.0), vec({2, 0})) == 0.0);
    CHECK(evaluate(JumpKernel::compact_bump(2, 1.0), vec({0, 1})) > 0.0);
  }

  TEST_CASE("evaluate: origin is rejected") {
    CHECK_THROWS_AS(evaluate(JumpKernel::fractional(2, 0.5), Point::Zero(2)), ArgumentError);
  }

  TEST_CASE("isotropy and nonnegativity on random pairs") {
    const std::vector<JumpKernel> kernels{JumpKernel::fractional(3, 0.4), JumpKernel::tempered_fractional(3, 0.3, 1.0),
                                          JumpKernel::truncated_fractional(3, 0.6, 1.5),
                                          JumpKernel::compact_bump(3, 0.7),
                                          JumpKernel::tabulated(3, {0.1, 0.5, 2.0}, {10.0, 2.0, 0.1})};
    CounterStream rng(42);
    for (const auto& k : kernels) {
      for (int i = 0; i < 200; ++i) {
        const double r = 3.0 * rng.uniform();
        const Point a = r * random_direction(3, rng);
        const Point b = r * random_direction(3, rng);
        CHECK(evaluate(k, a) >= 0.0);
        CHECK(evaluate(k, a) == doctest::Approx(evaluate(k, b)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("levy_integrability: spec examples") {
    const auto frac = levy_integrability(JumpKernel::fractional(1, 0.5));
    CHECK(frac.finite);
    CHECK(frac.value == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(levy_integrability(JumpKernel::zero(2)).value == 0.0);
    const auto formal = levy_integrability(JumpKernel::fractional(1, 1.0));
    CHECK_FALSE(formal.finite);
    CHECK_FALSE(formal.diagnostic.empty());
  }

  TEST_CASE("levy_integrability equals trace(Sigma_1) + lambda_1") {
    for (const auto& k : {JumpKernel::fractional(2, 0.7), JumpKernel::tempered_fractional(2, 0.3, 1.0),
                          JumpKernel::compact_bump(3, 0.8), JumpKernel::truncated_fractional(1, 0.2, 3.0)}) {
      const auto report = levy_integrability(k);
      const auto stats = small_jump_stats(k, 1.0);
      CHECK(report.value == doctest::Approx(stats.small_cov.trace() + stats.big_rate).epsilon(1e-6));
    }
  }

  TEST_CASE("symbol: spec examples and independent oracles") {
    CHECK(std::abs(symbol(JumpKernel::zero(2), vec({1.0, 2.0}))) == 0.0);
    const auto psi = symbol(JumpKernel::fractional(1, 0.5), vec({3.0}));
    CHECK(psi.real() == doctest::Approx(3.0 * pi).epsilon(1e-10));
    CHECK(psi.imag() == 0.0);
    CHECK(psi.real() == doctest::Approx(fractional_symbol_oracle(0.5, 3.0)).epsilon(1e-6));
    CHECK(symbol(JumpKernel::fractional(1, 0.3), vec({2.0})).real() ==
          doctest::Approx(fractional_symbol_oracle(0.3, 2.0)).epsilon(1e-6));
    for (double z : {0.3, 1.0, 4.0, 20.0}) {
      const auto t = symbol(JumpKernel::tempered_fractional(1, 0.3, 1.0), vec({z}));
      CHECK(t.real() == doctest::Approx(tempered_symbol_1d(0.3, 1.0, z)).epsilon(1e-6));
      CHECK(t.imag() == 0.0);
    }
  }

  TEST_CASE("symbol: generic quadrature agrees with the fractional closed form in d = 2, 3") {
    // Truncation at a large radius changes psi by at most twice the removed mass.
    for (int d : {2, 3}) {
      const double r_cut = 1e4;
      const auto exact = symbol(JumpKernel::fractional(d, 0.6), Point::Constant(d, 0.8));
      const auto cut = symbol(JumpKernel::truncated_fractional(d, 0.6, r_cut), Point::Constant(d, 0.8));
      const double removed = JumpKernel::fractional(d, 0.6).mass_outside(r_cut);
      CHECK(std::abs(exact.real() - cut.real()) <= 2.0 * removed + 1e-6 * exact.real());
    }
  }

  TEST_CASE("symbol: psi(0) = 0, even, nonnegative") {
    CounterStream rng(7);
    for (const auto& k : {JumpKernel::tempered_fractional(2, 0.3, 1.0), JumpKernel::compact_bump(2, 0.5),
                          JumpKernel::tabulated(2, {0.2, 1.0}, {5.0, 1.0})}) {
      CHECK(std::abs(symbol(k, Point::Zero(2))) == 0.0);
      for (int i = 0; i < 5; ++i) {
        const Point z = 5.0 * rng.uniform() * random_direction(2, rng);
        const auto a = symbol(k, z);
        const auto b = symbol(k, -z);
        CHECK(a.real() >= 0.0);
        CHECK(a.real() == doctest::Approx(b.real()).epsilon(1e-12));
        CHECK(a.imag() == doctest::Approx(-b.imag()));
      }
    }
  }

  TEST_CASE("check_A1: spec examples") {
    const auto sym = check_A1(JumpKernel::fractional(2, 0.5), {0.5, 1.0, 4.0});
    CHECK(sym.im_ratio_max == 0.0);
    CHECK(sym.pass);
    CHECK(check_A1(JumpKernel::zero(2), {0.1, 1.0}).pass);
    const auto tempered = check_A1(JumpKernel::tempered_fractional(2, 0.3, 1.0), {0.1, 1.0, 10.0});
    CHECK(tempered.pass);
    for (double v : tempered.re_inf_per_radius) CHECK(v > 0.0);
  }

  TEST_CASE("small_jump_stats: spec examples") {
    const auto s = small_jump_stats(JumpKernel::fractional(1, 0.5), 0.1);
    CHECK(s.big_rate == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(s.small_cov(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s.compensator_drift.norm() == 0.0);
    const auto z = small_jump_stats(JumpKernel::zero(2), 0.5);
    CHECK(z.big_rate == 0.0);
    CHECK(z.small_cov.norm() == 0.0);
    CHECK(z.compensator_drift.norm() == 0.0);
    CHECK_THROWS_AS(small_jump_stats(JumpKernel::fractional(1, 0.5), 0.0), ArgumentError);
    CHECK_THROWS_AS(small_jump_stats(JumpKernel::fractional(1, 0.5), -1.0), ArgumentError);
  }

  TEST_CASE("small_jump_stats: rate nonincreasing, covariance PSD") {
    const auto k = JumpKernel::tempered_fractional(3, 0.4, 2.0);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps : {0.01, 0.05, 0.1, 0.5, 1.0}) {
      const auto s = small_jump_stats(k, eps);
      CHECK(s.big_rate <= previous);
      previous = s.big_rate;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.small_cov);
      CHECK(es.eigenvalues().minCoeff() >= 0.0);
    }
  }

  TEST_CASE("sample_big_jump: Pareto radii pass Kolmogorov-Smirnov") {
    const auto k = JumpKernel::fractional(1, 0.5);
    const BigJumpSampler sampler(k, 0.1);
    std::vector<double> radii;
    int positive = 0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
      CounterStream rng = CounterStream::derive(3, i);
      const Point y = sampler.sample(rng);
      radii.push_back(std::abs(y(0)));
      positive += y(0) > 0 ? 1 : 0;
    }
    CHECK(ks_statistic(radii, [](double r) { return 1.0 - 0.1 / r; }) < 0.01);
    CHECK(std::abs(positive - 50000) < 3 * std::sqrt(25000.0));
  }

  TEST_CASE("sample_big_jump: symmetric mean and truncated support") {
    const auto k = JumpKernel::truncated_fractional(2, 0.5, 2.0);
    const BigJumpSampler sampler(k, 1.0);
    Point sum = Point::Zero(2);
    const int n = 100000;
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(n); ++i) {
      CounterStream rng = CounterStream::derive(9, i);
      const Point y = sampler.sample(rng);
      REQUIRE(y.norm() > 1.0);
      REQUIRE(y.norm() <= 2.0);
      sum += y;
    }
    // |y| <= 2 so each coordinate has standard deviation below 2.
    CHECK((sum / n).norm() < 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
  }

  TEST_CASE("sample_big_jump: binned density matches j / lambda_eps") {
    const auto k = JumpKernel::tabulated(1, {0.2, 1.0, 3.0}, {8.0, 1.0, 0.05});
    const double eps = 0.3;
    const BigJumpSampler sampler(k, eps);
    const int n = 200000;
    const std::vector<double> edges{0.3, 0.5, 0.8, 1.2, 2.0, 3.0};
    std::vector<int> counts(edges.size() - 1, 0);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(n); ++i) {
      CounterStream rng = CounterStream::derive(5, i);
      const double r = sampler.sample_radius(rng);
      for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        if (r > edges[b] && r <= edges[b + 1]) ++counts[b];
      }
    }
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      // Both signs: the radial mass on (a, c) is 2 int_a^c j.
      const double p = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                           [&](double r) { return 2.0 * k.profile(r); }, edges[b], edges[b + 1]) /
                       sampler.rate();
      const double se = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(counts[b] / static_cast<double>(n) - p) < 4.0 * se);
    }
  }

  TEST_CASE("sample_big_jump: zero mass is a logic error") {
    CounterStream rng(1);
    const auto zero = JumpKernel::zero(1);
    const auto truncated = JumpKernel::truncated_fractional(1, 0.5, 0.5);
    CHECK(BigJumpSampler(zero, 0.5).rate() == 0.0);
    CHECK_THROWS_AS(BigJumpSampler(zero, 0.5).sample(rng), std::logic_error);
    CHECK_THROWS_AS(sample_big_jump(truncated, 0.8, rng), std::logic_error);
  }
}
