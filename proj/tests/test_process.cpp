#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shls/chain_library.hpp"
#include "shls/process.hpp"
#include "shls/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <omp.h>

#include <cmath>

using namespace shls;
using namespace shls::process;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(rng::philox4x32_10({0, 0, 0, 0}, {0, 0}) == rng::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(rng::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        rng::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(rng::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        rng::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms lie in [0, 1)") {
  rng::PathStream st(3, 7);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = st.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

namespace {

ProcessConfig small_config(double s, std::uint64_t seed) {
  auto cfg = ProcessConfig::for_chain(spectral::random_reversible_chain(5, 17));
  cfg.s = s;
  cfg.seed = seed;
  cfg.dt = 0.02;
  return cfg;
}

}  // namespace

TEST_CASE("parallel sampling matches the serial reference and is seed deterministic") {
  const auto cfg = small_config(2.0, 5);
  const StateFunction f = spectral::random_zero_mean_function(cfg.chain, 1);
  const StateFunction h = spectral::random_zero_mean_function(cfg.chain, 2);
  const HarmonicIntegrands integ(cfg.dec, f, h, 1.0, cfg.truncation);
  omp_set_num_threads(4);
  const auto par = sample_paths(cfg, 2000, integ);
  const auto ser = reference::sample_paths(cfg, 2000, integ);
  CHECK(par == ser);
  omp_set_num_threads(1);
  CHECK(sample_paths(cfg, 2000, integ) == par);
  auto other = cfg;
  other.seed = 6;
  CHECK_FALSE(sample_paths(other, 2000, integ) == par);
}

TEST_CASE("harmonic integrands: primitive and derivative are consistent") {
  const auto model = spectral::random_reversible_chain(4, 3);
  const auto dec = spectral::decompose(model);
  const StateFunction f = spectral::random_zero_mean_function(model, 4);
  for (double alpha : {0.5, 1.0, 1.5})
    for (double N : {kInf, 2.0}) {
      const HarmonicIntegrands integ(dec, f, f, alpha, N);
      StochasticValue a;
      double b[2];
      const auto value = [&](double y) {
        integ.evaluate(1, y, &a, b);
        return a.value;
      };
      for (double y : {0.3, 1.7, 3.1}) {
        const double prim = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(value, 0.0, y, 15, 1e-13);
        const double fd = (value(y + 1e-6) - value(y - 1e-6)) / 2e-6;
        integ.evaluate(1, y, &a, b);
        CHECK(a.primitive == doctest::Approx(prim).epsilon(1e-9));
        CHECK(a.dy == doctest::Approx(fd).epsilon(1e-6));
        const Vector du = spectral::dy_harmonic(dec, y, f, 1);
        const double w = std::min(std::pow(y, alpha), N);
        CHECK(b[0] == doctest::Approx(w * du(1) * du(1)).epsilon(1e-12));
        CHECK(b[1] == doctest::Approx(w * w * du(1) * du(1)).epsilon(1e-12));
      }
    }
}

TEST_CASE("Green quadrature of the indicator of y < 1") {
  const auto model = spectral::random_reversible_chain(6, 2);
  const double M = model.total_mass();
  for (double s : {0.25, 0.5, 1.0, 3.0}) {
    const double oracle = 2.0 * M * (s >= 1.0 ? 0.5 : s - 0.5 * s * s);
    CHECK(green_quadrature(model, indicator_below(1.0), s) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("exit identity and terminal law on a small chain") {
  const auto cfg = small_config(1.0, 11);
  CHECK(exit_identity_check(cfg, spectral::random_function(5, 3), 20000).passed());
  CHECK(terminal_distribution_check(cfg, 20000).status != Status::fail);
}

TEST_CASE("Green formula for the indicator") {
  const auto cfg = small_config(0.5, 12);
  CHECK(green_formula_check(cfg, indicator_below(1.0), 50000).passed());
}

TEST_CASE("invalid configuration") {
  auto cfg = small_config(1.0, 1);
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
