#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shls/chain.hpp"
#include "shls/chain_library.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace shls;
using namespace shls::spectral;

TEST_CASE("two-state chain has spectrum {0, 2}") {
  const auto dec = decompose(two_state_chain());
  CHECK(dec.lambdas(0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(dec.lambdas(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(dec.gap() == doctest::Approx(2.0));
}

TEST_CASE("semigroup on the two-state chain is exp(-2t) on the odd mode") {
  const auto dec = decompose(two_state_chain());
  StateFunction f(2);
  f << 3.0, -1.0;
  for (double t : {0.0, 0.1, 1.0, 5.0}) {
    const Vector Tf = apply_semigroup(dec, t, f);
    CHECK(Tf(0) == doctest::Approx(1.0 + 2.0 * std::exp(-2.0 * t)).epsilon(1e-13));
    CHECK(Tf(1) == doctest::Approx(1.0 - 2.0 * std::exp(-2.0 * t)).epsilon(1e-13));
  }
}

TEST_CASE("spectral semigroup matches the matrix exponential") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto model = random_reversible_chain(3 + seed, seed);
    const auto dec = decompose(model);
    const StateFunction f = random_function(model.size(), seed + 10);
    for (double t : {0.05, 0.7, 3.0}) {
      const Vector oracle = (model.generator * t).exp() * f;
      CHECK((apply_semigroup(dec, t, f) - oracle).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("Poisson semigroup matches exp(-y sqrt(-L)) by matrix square root") {
  const auto model = random_reversible_chain(7, 3);
  const auto dec = decompose(model);
  // -L is similar to a symmetric matrix through diag(sqrt m)
  const Vector r = model.weights.cwiseSqrt();
  const Matrix S = -(r.asDiagonal() * model.generator * r.cwiseInverse().asDiagonal());
  const Matrix Ssym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Ssym);
  const Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const StateFunction f = random_function(7, 9);
  for (double y : {0.1, 1.0, 4.0}) {
    const Vector ex = (-y * roots).array().exp();
    const Matrix P = r.cwiseInverse().asDiagonal() * es.eigenvectors() * ex.asDiagonal() *
                     es.eigenvectors().transpose() * r.asDiagonal();
    CHECK((apply_poisson(dec, y, f) - P * f).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("harmonic extension derivatives match finite differences") {
  const auto model = random_reversible_chain(5, 4);
  const auto dec = decompose(model);
  const StateFunction f = random_function(5, 2);
  const double y = 0.8, h = 1e-5;
  const Vector fd = (apply_poisson(dec, y + h, f) - apply_poisson(dec, y - h, f)) / (2 * h);
  CHECK((dy_harmonic(dec, y, f, 1) - fd).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("property: contraction and mass conservation on random chains") {
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const auto model = random_reversible_chain(2 + seed % 9, seed, 0.3);
    const auto dec = decompose(model);
    const StateFunction f = random_function(model.size(), seed);
    for (double t : {0.01, 0.5, 2.0}) {
      const Vector Tf = apply_semigroup(dec, t, f);
      CHECK(model.weights.dot(Tf) == doctest::Approx(model.weights.dot(f)).epsilon(1e-11));
      for (double p : {1.0, 2.0, 4.0, kInf}) CHECK(lp_norm(model.weights, Tf, p) <= lp_norm(model.weights, f, p) * (1 + 1e-12));
    }
  }
}

TEST_CASE("fractional integral quadrature matches lambda^{-alpha/2}") {
  const auto model = random_reversible_chain(9, 5);
  const auto dec = decompose(model);
  const StateFunction f = random_zero_mean_function(model, 6);
  for (double alpha : {0.5, 1.0, 1.5, 2.5}) {
    const Vector exact = fractional_integral_spectral(dec, alpha, f);
    const auto q = fractional_integral_quadrature(dec, alpha, f, 1e-12);
    CHECK((q.values - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("fractional integral on the two-state chain: 2^{-alpha/2} on the odd mode") {
  const auto dec = decompose(two_state_chain());
  StateFunction f(2);
  f << 1.0, -1.0;
  const Vector If = fractional_integral_spectral(dec, 1.0, f);
  CHECK(If(0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("fractional integral rejects a constant component") {
  const auto model = random_reversible_chain(4, 1);
  const auto dec = decompose(model);
  CHECK_THROWS_AS(fractional_integral_spectral(dec, 1.0, StateFunction::Ones(4)), std::invalid_argument);
}

TEST_CASE("validate names the offending pair") {
  ChainModel bad;
  bad.generator = Matrix(2, 2);
  bad.generator << -1.0, 1.0, 2.0, -2.0;
  bad.weights = Vector::Ones(2);
  try {
    validate(bad);
    FAIL("expected a detailed-balance error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("0") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
}

TEST_CASE("chain JSON round trip") {
  const auto model = random_reversible_chain(6, 8);
  const auto path = (std::filesystem::temp_directory_path() / "shls_chain_roundtrip.json").string();
  save_chain(model, path);
  const auto back = load_chain(path);
  CHECK((back.generator - model.generator).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.weights - model.weights).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
  CHECK(resolve_chain("builtin:three-cycle").size() == 3);
  CHECK_THROWS(resolve_chain("builtin:nonsense"));
}

TEST_CASE("reconstruction and orthonormality on random chains") {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    const auto model = random_reversible_chain(16, seed);
    const auto dec = decompose(model);
    CHECK((reconstruct_negative_generator(dec) + model.generator).cwiseAbs().maxCoeff() < 1e-10);
    const Matrix gram = dec.vectors.transpose() * model.weights.asDiagonal() * dec.vectors;
    CHECK((gram - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);
  }
}
