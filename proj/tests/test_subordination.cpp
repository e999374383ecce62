#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shls/chain.hpp"
#include "shls/chain_library.hpp"
#include "shls/subordination.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

using namespace shls;

TEST_CASE("subordinator density is a probability density") {
  boost::math::quadrature::exp_sinh<double> q;
  for (double y : {0.1, 1.0, 7.0}) CHECK(q.integrate([y](double s) { return subordination::density(y, s); }) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Laplace transform of the subordinator") {
  boost::math::quadrature::exp_sinh<double> q;
  for (double y : {0.5, 2.0})
    for (double lambda : {0.01, 1.0, 25.0}) {
      const double v = q.integrate([&](double s) { return subordination::density(y, s) * std::exp(-lambda * s); });
      CHECK(v == doctest::Approx(std::exp(-y * std::sqrt(lambda))).epsilon(1e-10));
    }
}

TEST_CASE("tail mass against direct integration") {
  boost::math::quadrature::tanh_sinh<double> q;
  for (double y : {0.3, 2.0})
    for (double S : {0.1, 10.0}) {
      const double head = q.integrate([&](double s) { const double v = s > 0.0 ? subordination::density(y, s) : 0.0; return std::isfinite(v) ? v : 0.0; }, 0.0, S);
      CHECK(subordination::tail_mass(y, S) == doctest::Approx(1.0 - head).epsilon(1e-9));
    }
}

TEST_CASE("density derivative by finite differences") {
  const double y = 1.3, s = 0.7, h = 1e-6;
  const double fd = (subordination::density(y + h, s) - subordination::density(y - h, s)) / (2 * h);
  CHECK(subordination::density_dy(y, s) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("derivative bound constant is 4 e^{-5/4}, attained at z = 10") {
  // d/dz [(z/2 - 1) e^{-z/8}] = 0 at z = 10
  CHECK(subordination::derivative_bound_constant() == doctest::Approx(4.0 * std::exp(-1.25)).epsilon(1e-12));
}

TEST_CASE("subordination reproduces the closed-form two-state Poisson semigroup") {
  const auto dec = spectral::decompose(spectral::two_state_chain());
  StateFunction f(2);
  f << 2.0, 0.0;
  for (double y : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const auto out = subordination::poisson_via_subordination(dec, y, f);
    const double odd = std::exp(-y * std::sqrt(2.0));
    CHECK(out.values(0) == doctest::Approx(1.0 + odd).epsilon(1e-9));
    CHECK(out.values(1) == doctest::Approx(1.0 - odd).epsilon(1e-9));
    const auto d = subordination::dy_via_subordination(dec, y, f);
    CHECK(d.values(0) == doctest::Approx(-std::sqrt(2.0) * odd).epsilon(1e-8));
  }
}

TEST_CASE("generic sampler: scalar exponential") {
  const Sampler decay = [](double t) { return Vector::Constant(1, std::exp(-3.0 * t)); };
  const auto out = subordination::poisson_via_subordination(decay, 0.4, {3.0, 3.0});
  CHECK(out.values(0) == doctest::Approx(std::exp(-0.4 * std::sqrt(3.0))).epsilon(1e-9));
}

TEST_CASE("property: derivative ratio stays below sqrt2 * 4 e^{-5/4}") {
  std::vector<double> ys;
  for (int k = 0; k <= 30; ++k) ys.push_back(0.02 * std::pow(10.0, k / 10.0));
  const double bound = std::sqrt(2.0) * 4.0 * std::exp(-1.25);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto model = spectral::random_reversible_chain(3 + seed, seed);
    const auto dec = spectral::decompose(model);
    const auto r = subordination::derivative_bound_check(dec, spectral::random_function(model.size(), seed), ys);
    CHECK(r.value <= bound + 1e-9);
  }
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(subordination::density(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(subordination::tail_mass(1.0, -1.0), std::invalid_argument);
}
