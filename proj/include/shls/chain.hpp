#pragma once

// Finite reversible Markov generators and their exact spectral calculus.
//
// Every operator here is a function of the generator: for the spectral
// resolution -L = sum_i lambda_i phi_i phi_i^* (orthonormal in the
// m-weighted inner product) an operator g(-L) acts as
//   g(-L) f = sum_i g(lambda_i) <f, phi_i> phi_i.

#include "shls/common.hpp"

#include "json.hpp"

#include <cstddef>
#include <string>

namespace shls::spectral {

struct ChainModel {
  Matrix generator;  // L, row sums zero, off-diagonal rates >= 0
  Vector weights;    // stationary measure m, strictly positive

  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
  double total_mass() const { return weights.sum(); }
};

/// Throws std::invalid_argument unless L is a Markov generator in detailed
/// balance with m. The diagnostic names the worst offending (i, j) pair.
void validate(const ChainModel& model, double tolerance = 1e-9);

nlohmann::json to_json(const ChainModel& model);
ChainModel chain_from_json(const nlohmann::json& j);
ChainModel load_chain(const std::string& path);
void save_chain(const ChainModel& model, const std::string& path);

struct SpectralDecomposition {
  Vector lambdas;   // eigenvalues of -L, ascending, clamped at 0
  Matrix vectors;   // column i is phi_i, m-orthonormal
  Vector weights;   // copy of m

  std::size_t size() const { return static_cast<std::size_t>(lambdas.size()); }
  /// Smallest strictly positive eigenvalue, or +inf for a one-state chain.
  double gap() const;
  double max_eigenvalue() const { return lambdas(lambdas.size() - 1); }
};

/// Eigenvalues below this are treated as exactly zero.
inline constexpr double kZeroEigenvalue = 1e-12;

SpectralDecomposition decompose(const ChainModel& model);

double inner(const Vector& weights, const Vector& f, const Vector& g);
/// m-weighted L^p norm; p = +inf gives the max norm.
double lp_norm(const Vector& weights, const Vector& f, double p);

/// Coefficients <f, phi_i>.
Vector coefficients(const SpectralDecomposition& dec, const StateFunction& f);

/// sum_i g(lambda_i) <f, phi_i> phi_i
template <class Multiplier>
StateFunction apply_multiplier(const SpectralDecomposition& dec, const StateFunction& f,
                               Multiplier&& g) {
  Vector c = coefficients(dec, f);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= g(dec.lambdas(i));
  return dec.vectors * c;
}

/// -L reassembled from the spectrum, for reconstruction checks.
Matrix reconstruct_negative_generator(const SpectralDecomposition& dec);

StateFunction apply_semigroup(const SpectralDecomposition& dec, double t, const StateFunction& f);
StateFunction apply_poisson(const SpectralDecomposition& dec, double y, const StateFunction& f);

/// k-th height derivative of the harmonic extension u_f(., y); k >= 1.
StateFunction dy_harmonic(const SpectralDecomposition& dec, double y, const StateFunction& f,
                          int k);

/// Norm of the component of f in the lambda = 0 eigenspace relative to ||f||_2.
double null_component_ratio(const SpectralDecomposition& dec, const StateFunction& f);

inline constexpr double kZeroMeanTolerance = 1e-9;

/// sum_{lambda_i > 0} lambda_i^{-alpha/2} <f, phi_i> phi_i. Rejects f with a
/// null-space component above kZeroMeanTolerance.
StateFunction fractional_integral_spectral(const SpectralDecomposition& dec, double alpha,
                                           const StateFunction& f);

struct QuadratureOutcome {
  Vector values;
  double refinement_delta = 0.0;  // max-norm change over the last step halving
  double tail_estimate = 0.0;     // size of the discarded large-t tail
  std::size_t nodes = 0;
  double log_step = 0.0;
};

/// Rates that bound the sampler's time scales: T_t f decays at least like
/// exp(-slowest_rate t) and is constant to first order below 1/fastest_rate.
struct SemigroupScales {
  double slowest_rate;
  double fastest_rate;
};

/// (1/Gamma(alpha/2)) int_0^inf t^{alpha/2-1} T_t f dt over the substitution
/// t = e^u, with the step halved until two successive sums agree to
/// `tolerance`. Throws QuadratureError when that fails.
QuadratureOutcome fractional_integral_quadrature(const Sampler& semigroup, double alpha,
                                                 const SemigroupScales& scales,
                                                 double tolerance = 1e-10);

QuadratureOutcome fractional_integral_quadrature(const SpectralDecomposition& dec, double alpha,
                                                 const StateFunction& f,
                                                 double tolerance = 1e-10);

}  // namespace shls::spectral
