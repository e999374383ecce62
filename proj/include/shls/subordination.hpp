#pragma once

// The 1/2-stable subordinator and Bochner's construction
//   P_y f = int_0^inf T_s f eta_y(s) ds,
//   eta_y(s) = y / (2 sqrt(pi)) exp(-y^2 / 4s) s^{-3/2}.

#include "shls/chain.hpp"
#include "shls/report.hpp"

#include <vector>

namespace shls::subordination {

double density(double y, double s);
/// d/dy of the density: (1/y - y/(2s)) eta_y(s).
double density_dy(double y, double s);
/// int_S^inf eta_y(s) ds = erf(y / (2 sqrt(S))).
double tail_mass(double y, double S);

struct SubordinationOutcome {
  Vector values;
  double refinement_delta = 0.0;
  double tail_estimate = 0.0;  // max change of the sampler past the settle time
  std::size_t nodes = 0;
  double log_step = 0.0;
};

/// Slowest decay rate of the sampler towards its limit, and its fastest rate.
using spectral::SemigroupScales;

/// int_0^inf sampler(s) eta_y(s) ds on the lattice s = e^u. Past the settle
/// time 60/slowest_rate the sampler is held constant and the remaining lattice
/// terms are summed directly.
SubordinationOutcome poisson_via_subordination(const Sampler& semigroup, double y,
                                               const SemigroupScales& scales,
                                               double tolerance = 1e-10);

/// Same integral against d eta_y / dy, i.e. du_f/dy.
SubordinationOutcome dy_via_subordination(const Sampler& semigroup, double y,
                                          const SemigroupScales& scales,
                                          double tolerance = 1e-10);

/// Convenience wrappers for a chain.
SubordinationOutcome poisson_via_subordination(const spectral::SpectralDecomposition& dec,
                                               double y, const StateFunction& f,
                                               double tolerance = 1e-10);
SubordinationOutcome dy_via_subordination(const spectral::SpectralDecomposition& dec, double y,
                                          const StateFunction& f, double tolerance = 1e-10);

/// sup_{z >= 0} |1 - z/2| exp(-z/8), found numerically.
double derivative_bound_constant();

/// max over states and heights of |y du_f/dy(x,y)| / u_{|f|}(x, y/sqrt 2).
CheckReport derivative_bound_check(const spectral::SpectralDecomposition& dec,
                                   const StateFunction& f, const std::vector<double>& heights,
                                   double tolerance = 1e-3);

}  // namespace shls::subordination
