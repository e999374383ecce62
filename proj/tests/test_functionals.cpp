#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shls/chain.hpp"
#include "shls/chain_library.hpp"
#include "shls/functionals.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace shls;
using namespace shls::functionals;

namespace {

struct Fixture {
  spectral::ChainModel model = spectral::random_reversible_chain(8, 11);
  spectral::SpectralDecomposition dec = spectral::decompose(model);
};

// 2 sum_i lambda_i f_i h_i int_0^inf (y ^ s) y^alpha e^{-2 sqrt(lambda_i) y} dy
double pairing_by_integration(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                              const StateFunction& h, double alpha, double s) {
  const Vector cf = spectral::coefficients(dec, f), ch = spectral::coefficients(dec, h);
  boost::math::quadrature::exp_sinh<double> tail;
  boost::math::quadrature::tanh_sinh<double> head;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < cf.size(); ++i) {
    const double l = dec.lambdas(i);
    if (l <= 1e-12) continue;
    const double b = 2.0 * std::sqrt(l);
    const auto g = [&](double y) { return std::min(y, s) * std::pow(y, alpha) * std::exp(-b * y); };
    const double v = std::isinf(s) ? tail.integrate(g) : head.integrate(g, 0.0, s) + tail.integrate(g, s, kInf);
    sum += l * cf(i) * ch(i) * v;
  }
  return 2.0 * sum;
}

}  // namespace

TEST_CASE_FIXTURE(Fixture, "g_1 and G_alpha L2 identities") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const StateFunction f = spectral::random_zero_mean_function(model, seed);
    const HalfSpaceField hs(dec, f, {1});
    const double fn = spectral::lp_norm(model.weights, f, 2.0);
    CHECK(spectral::lp_norm(model.weights, g_function(hs, 1), 2.0) == doctest::Approx(0.5 * fn).epsilon(1e-6));
    for (double alpha : {0.5, 1.0, 2.0}) {
      const double If = spectral::lp_norm(model.weights, spectral::fractional_integral_spectral(dec, alpha, f), 2.0);
      const double oracle = std::sqrt(boost::math::tgamma(2 * alpha + 2)) / std::pow(2.0, alpha + 1) * If;
      CHECK(spectral::lp_norm(model.weights, frac_g_function(hs, alpha), 2.0) == doctest::Approx(oracle).epsilon(1e-6));
    }
  }
}

TEST_CASE_FIXTURE(Fixture, "g_2 L2 identity: ||g_2 f||_2^2 = (3/8) ||f||_2^2") {
  // int y^3 lambda^2 e^{-2 sqrt(lambda) y} dy = 6 / 16 = 3/8
  const StateFunction f = spectral::random_zero_mean_function(model, 3);
  const HalfSpaceField hs(dec, f, {2});
  const double fn = spectral::lp_norm(model.weights, f, 2.0);
  CHECK(spectral::lp_norm(model.weights, g_function(hs, 2), 2.0) == doctest::Approx(std::sqrt(3.0 / 8.0) * fn).epsilon(1e-6));
}

TEST_CASE_FIXTURE(Fixture, "maximal function bound") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const StateFunction f = spectral::random_function(model.size(), seed);
    const HalfSpaceField hs(dec, f, {0});
    for (double p : {1.5, 2.0, 3.0}) CHECK(stein_check(hs, p).passed());
    CHECK(maximal_function(hs).minCoeff() >= 0.0);
  }
}

TEST_CASE("Hedberg split minimises psi") {
  const HedbergInput in{2.0, 5.0, 1.0, 2.0, 3.0};
  const auto s = hedberg_split(in);
  const auto psi = [&](double d) { return in.M * std::pow(d, in.alpha) + in.F * std::pow(d, in.alpha - in.d / in.p); };
  CHECK(s.bound == doctest::Approx(psi(s.delta)).epsilon(1e-14));
  for (double f : {0.9, 0.99, 1.01, 1.1}) CHECK(psi(s.delta * f) > s.bound);
  CHECK(std::isinf(hedberg_split({0.0, 1.0, 1.0, 2.0, 3.0}).delta));
  CHECK(hedberg_split({1.0, 0.0, 1.0, 2.0, 3.0}).delta == 0.0);
  CHECK_THROWS(hedberg_split({1.0, 1.0, 2.0, 2.0, 3.0}));
}

TEST_CASE_FIXTURE(Fixture, "pairing: lattice quadrature, closed form and direct integration agree") {
  const StateFunction f = spectral::random_zero_mean_function(model, 21);
  const StateFunction h = spectral::random_zero_mean_function(model, 22);
  const HalfSpaceField hf(dec, f, {1}), hh(dec, h, {1});
  for (double alpha : {0.5, 1.0})
    for (double s : {0.5, 2.0, kInf}) {
      const double direct = pairing_by_integration(dec, f, h, alpha, s);
      const double closed = std::isinf(s) ? pairing_spectral(dec, f, h, alpha) : pairing_spectral(dec, f, h, alpha, s);
      CHECK(closed == doctest::Approx(direct).epsilon(1e-9));
      CHECK(pairing_quadrature(hf, hh, alpha, {s, kInf, false}) == doctest::Approx(direct).epsilon(1e-5));
    }
}

TEST_CASE_FIXTURE(Fixture, "pairing at s = inf is Gamma(alpha+2) 2^{-(alpha+1)} <I_alpha f, h>") {
  const StateFunction f = spectral::random_zero_mean_function(model, 31);
  const StateFunction h = spectral::random_zero_mean_function(model, 32);
  const double inner = spectral::inner(model.weights, spectral::fractional_integral_spectral(dec, 1.0, f), h);
  CHECK(pairing_spectral(dec, f, h, 1.0) == doctest::Approx(boost::math::tgamma(3.0) / 4.0 * inner).epsilon(1e-12));
}

TEST_CASE_FIXTURE(Fixture, "property: Cauchy-Schwarz bound on the pairing") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const StateFunction f = spectral::random_function(model.size(), seed);
    const StateFunction h = spectral::random_function(model.size(), seed + 100);
    const HalfSpaceField hf(dec, f, {1}), hh(dec, h, {1});
    const double lhs = pairing_quadrature(hf, hh, 1.0, {kInf, kInf, true});
    const double rhs = 2.0 * (model.weights.array() * frac_g_function(hf, 1.0).array() * g_function(hh, 1).array()).sum();
    CHECK(lhs <= rhs * (1 + 1e-12));
  }
}

TEST_CASE_FIXTURE(Fixture, "truncation caps the weight") {
  const StateFunction f = spectral::random_zero_mean_function(model, 41);
  const HalfSpaceField hf(dec, f, {1});
  const double full = pairing_quadrature(hf, hf, 1.0, {kInf, kInf, false});
  const double capped = pairing_quadrature(hf, hf, 1.0, {kInf, 0.5, false});
  CHECK(capped < full);
  CHECK(capped > 0.0);
}

TEST_CASE_FIXTURE(Fixture, "profile CSV has one row per node") {
  const StateFunction f = spectral::random_zero_mean_function(model, 51);
  const HalfSpaceField hf(dec, f, {1}, 64);
  std::ostringstream out;
  write_profile_csv(out, hf, hf, 1.0, 0);
  const std::string s = out.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 65);
}
