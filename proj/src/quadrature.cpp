#include "shls/quadrature.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace shls {

QuadratureRule QuadratureRule::log_lattice(double lo, double hi, double log_step,
                                           double tolerance) {
  if (!(lo > 0.0) || !(hi > lo) || !(log_step > 0.0)) {
    throw std::invalid_argument("log_lattice: need 0 < lo < hi and a positive step");
  }
  QuadratureRule rule;
  rule.tolerance = tolerance;
  rule.log_step = log_step;
  rule.substitution = "t = exp(u), uniform u-step";
  const double u0 = std::log(lo);
  const double u1 = std::log(hi);
  const auto count = static_cast<std::size_t>(std::ceil((u1 - u0) / log_step - 1e-12)) + 1;
  rule.nodes.reserve(count);
  rule.weights.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = std::exp(u0 + static_cast<double>(k) * log_step);
    rule.nodes.push_back(t);
    rule.weights.push_back(log_step * t);
  }
  return rule;
}

void QuadratureRule::write_csv(std::ostream& out) const {
  out << "node,weight\n" << std::setprecision(17);
  for (std::size_t k = 0; k < nodes.size(); ++k) out << nodes[k] << ',' << weights[k] << '\n';
}

double geometric_tail(double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw std::invalid_argument("geometric_tail: ratio outside [0,1)");
  return ratio / (1.0 - ratio);
}

}  // namespace shls
