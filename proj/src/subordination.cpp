#include "shls/subordination.hpp"

#include "shls/quadrature.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace shls::subordination {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

void check_args(double y, double s) {
  if (!(y > 0.0) || !(s > 0.0)) throw std::invalid_argument("subordinator density: need y > 0 and s > 0");
}

enum class Kernel { density, derivative };

double kernel(Kernel k, double y, double s) {
  return k == Kernel::density ? density(y, s) : density_dy(y, s);
}

SubordinationOutcome subordinate(const Sampler& semigroup, double y, const SemigroupScales& scales,
                                 double tolerance, Kernel which) {
  if (!(y > 0.0)) throw std::invalid_argument("subordination: height must be positive");
  if (!(scales.slowest_rate > 0.0)) throw std::invalid_argument("subordination: slowest rate must be positive");

  const double s_lo = y * y / 200.0;
  const double s_hi = std::max(60.0 / scales.slowest_rate, s_lo * 4.0);

  SubordinationOutcome out;
  std::vector<Vector> samples;
  Vector previous;
  double du = 0.5;
  for (int level = 0; level < 8; ++level, du *= 0.5) {
    const QuadratureRule rule = QuadratureRule::log_lattice(s_lo, s_hi, du, tolerance);
    std::vector<Vector> current(rule.size());
    for (std::size_t k = 0; k < rule.size(); ++k) {
      current[k] = (level > 0 && k % 2 == 0 && k / 2 < samples.size()) ? samples[k / 2]
                                                                       : semigroup(rule.nodes[k]);
    }
    samples = std::move(current);

    Vector sum = Vector::Zero(samples.front().size());
    for (std::size_t k = 0; k < rule.size(); ++k)
      sum += rule.weights[k] * kernel(which, y, rule.nodes[k]) * samples[k];

    // Lattice points past s_hi: sampler frozen, kernel ~ s^{-3/2} (or s^{-5/2}).
    const double u_end = std::log(rule.nodes.back());
    double tail = 0.0;
    for (int j = 1;; ++j) {
      const double s = std::exp(u_end + j * du);
      const double term = du * s * kernel(which, y, s);
      tail += term;
      // Far out the terms are geometric with ratio e^{-du/2}.
      if (s > 1e12 * y * y) {
        tail += term * geometric_tail(std::exp(-0.5 * du));
        break;
      }
    }
    sum += tail * samples.back();

    out.nodes = rule.size();
    out.log_step = du;
    if (level > 0) {
      out.refinement_delta = (sum - previous).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, sum.cwiseAbs().maxCoeff());
      if (out.refinement_delta <= tolerance * scale) {
        out.tail_estimate = std::abs(tail) * (semigroup(2.0 * s_hi) - samples.back()).cwiseAbs().maxCoeff();
        out.values = std::move(sum);
        return out;
      }
    }
    previous = std::move(sum);
  }
  std::ostringstream msg;
  msg << "subordination: no convergence at y = " << y << ", last change " << out.refinement_delta;
  throw QuadratureError(msg.str());
}

Sampler chain_sampler(const spectral::SpectralDecomposition& dec, const StateFunction& f) {
  const Vector c = spectral::coefficients(dec, f);
  return [&dec, c](double t) {
    Vector scaled = c;
    for (Eigen::Index i = 0; i < c.size(); ++i) scaled(i) *= std::exp(-dec.lambdas(i) * t);
    return Vector(dec.vectors * scaled);
  };
}

SemigroupScales chain_scales(const spectral::SpectralDecomposition& dec) {
  const double gap = dec.gap();
  if (!std::isfinite(gap)) return {1.0, 1.0};
  return {gap, dec.max_eigenvalue()};
}

}  // namespace

double density(double y, double s) {
  check_args(y, s);
  return y / (2.0 * std::sqrt(kPi)) * std::exp(-y * y / (4.0 * s)) * std::pow(s, -1.5);
}

double density_dy(double y, double s) {
  return (1.0 / y - y / (2.0 * s)) * density(y, s);
}

double tail_mass(double y, double S) {
  check_args(y, S);
  return boost::math::erf(y / (2.0 * std::sqrt(S)));
}

SubordinationOutcome poisson_via_subordination(const Sampler& semigroup, double y,
                                               const SemigroupScales& scales, double tolerance) {
  return subordinate(semigroup, y, scales, tolerance, Kernel::density);
}

SubordinationOutcome dy_via_subordination(const Sampler& semigroup, double y,
                                          const SemigroupScales& scales, double tolerance) {
  return subordinate(semigroup, y, scales, tolerance, Kernel::derivative);
}

SubordinationOutcome poisson_via_subordination(const spectral::SpectralDecomposition& dec, double y,
                                               const StateFunction& f, double tolerance) {
  if (y == 0.0) return {f, 0.0, 0.0, 0, 0.0};
  return subordinate(chain_sampler(dec, f), y, chain_scales(dec), tolerance, Kernel::density);
}

SubordinationOutcome dy_via_subordination(const spectral::SpectralDecomposition& dec, double y,
                                          const StateFunction& f, double tolerance) {
  return subordinate(chain_sampler(dec, f), y, chain_scales(dec), tolerance, Kernel::derivative);
}

double derivative_bound_constant() {
  const auto g = [](double z) { return std::abs(1.0 - 0.5 * z) * std::exp(-z / 8.0); };
  double best_z = 0.0, best = g(0.0);
  for (int i = 1; i <= 20000; ++i) {
    const double z = 0.01 * i;
    if (g(z) > best) {
      best = g(z);
      best_z = z;
    }
  }
  const auto neg = [&g](double z) { return -g(z); };
  const auto refined = boost::math::tools::brent_find_minima(neg, std::max(0.0, best_z - 0.01),
                                                             best_z + 0.01, 52);
  return std::max(best, -refined.second);
}

CheckReport derivative_bound_check(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                                   const std::vector<double>& heights, double tolerance) {
  CheckReport r;
  r.name = "derivative-bound";
  r.anchor = "|y du_f/dy (x,y)| <= c1 u_{|f|}(x, y/sqrt2), c1 = sup |1 - z/2| e^{-z/8}";
  r.oracle = derivative_bound_constant();
  r.tolerance = tolerance;
  r.comparison = Comparison::upper_bound;
  const StateFunction abs_f = f.cwiseAbs();
  double worst = 0.0;
  std::size_t excluded = 0, evaluated = 0;
  double worst_y = 0.0;
  for (double y : heights) {
    const Vector num = y * spectral::dy_harmonic(dec, y, f, 1).cwiseAbs();
    const Vector den = spectral::apply_poisson(dec, y / std::sqrt(2.0), abs_f);
    for (Eigen::Index i = 0; i < num.size(); ++i) {
      if (den(i) < 1e-300) {
        ++excluded;
        continue;
      }
      ++evaluated;
      const double ratio = num(i) / den(i);
      if (ratio > worst) {
        worst = ratio;
        worst_y = y;
      }
    }
  }
  r.value = worst;
  r.details["points"] = evaluated;
  r.details["excluded"] = excluded;
  r.details["worst_height"] = worst_y;
  return r.decide();
}

}  // namespace shls::subordination
