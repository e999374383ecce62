#include "shls/chain.hpp"

#include "shls/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace shls::spectral {

void validate(const ChainModel& model, double tolerance) {
  const auto n = static_cast<Eigen::Index>(model.weights.size());
  if (n == 0) throw std::invalid_argument("chain: empty state space");
  if (model.generator.rows() != n || model.generator.cols() != n) {
    std::ostringstream msg;
    msg << "chain: generator is " << model.generator.rows() << "x" << model.generator.cols()
        << " but there are " << n << " weights";
    throw std::invalid_argument(msg.str());
  }
  if (!model.generator.allFinite() || !model.weights.allFinite()) {
    throw std::invalid_argument("chain: non-finite entries");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(model.weights(i) > 0.0)) {
      throw std::invalid_argument("chain: weight m[" + std::to_string(i) + "] is not positive");
    }
  }
  const double scale = std::max(1.0, model.generator.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && model.generator(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "chain: negative rate L[" << i << "][" << j << "] = " << model.generator(i, j);
        throw std::invalid_argument(msg.str());
      }
    }
    const double row = model.generator.row(i).sum();
    if (std::abs(row) > tolerance * scale) {
      std::ostringstream msg;
      msg << "chain: row " << i << " of L sums to " << row << ", not 0";
      throw std::invalid_argument(msg.str());
    }
  }
  double worst = 0.0;
  Eigen::Index wi = 0, wj = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double flow_ij = model.weights(i) * model.generator(i, j);
      const double flow_ji = model.weights(j) * model.generator(j, i);
      const double gap = std::abs(flow_ij - flow_ji);
      if (gap > worst) {
        worst = gap;
        wi = i;
        wj = j;
      }
    }
  }
  const double flow_scale = std::max(1.0, (model.weights.asDiagonal() * model.generator).cwiseAbs().maxCoeff());
  if (worst > tolerance * flow_scale) {
    std::ostringstream msg;
    msg << "chain: detailed balance fails, worst pair (" << wi << ", " << wj
        << "): m_i L_ij = " << model.weights(wi) * model.generator(wi, wj)
        << " vs m_j L_ji = " << model.weights(wj) * model.generator(wj, wi);
    throw std::invalid_argument(msg.str());
  }
}

nlohmann::json to_json(const ChainModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) rows.push_back(model.generator(i, j));
  std::vector<double> m(model.weights.data(), model.weights.data() + n);
  nlohmann::json j;
  j["n"] = n;
  j["L"] = rows;
  j["m"] = m;
  return j;
}

ChainModel chain_from_json(const nlohmann::json& j) {
  const auto n = j.at("n").get<Eigen::Index>();
  const auto rows = j.at("L").get<std::vector<double>>();
  const auto m = j.at("m").get<std::vector<double>>();
  if (n <= 0 || rows.size() != static_cast<std::size_t>(n * n) ||
      m.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("chain json: expected n, an n*n row-major L and n weights");
  }
  ChainModel model;
  model.generator.resize(n, n);
  model.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    model.weights(i) = m[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < n; ++k) model.generator(i, k) = rows[static_cast<std::size_t>(i * n + k)];
  }
  return model;
}

ChainModel load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open chain file " + path);
  return chain_from_json(nlohmann::json::parse(in));
}

void save_chain(const ChainModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write chain file " + path);
  out << to_json(model).dump(2) << '\n';
}

double SpectralDecomposition::gap() const {
  for (Eigen::Index i = 0; i < lambdas.size(); ++i)
    if (lambdas(i) > 0.0) return lambdas(i);
  return kInf;
}

SpectralDecomposition decompose(const ChainModel& model) {
  validate(model);
  const Vector sqrt_m = model.weights.cwiseSqrt();
  const Vector inv_sqrt_m = sqrt_m.cwiseInverse();
  // D^{1/2} (-L) D^{-1/2} is symmetric exactly when detailed balance holds.
  Matrix sym = -(sqrt_m.asDiagonal() * model.generator * inv_sqrt_m.asDiagonal());
  sym = 0.5 * (sym + sym.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("decompose: eigensolver failed");

  SpectralDecomposition dec;
  dec.weights = model.weights;
  dec.lambdas = solver.eigenvalues();
  for (Eigen::Index i = 0; i < dec.lambdas.size(); ++i)
    if (dec.lambdas(i) < kZeroEigenvalue) dec.lambdas(i) = 0.0;
  dec.vectors = inv_sqrt_m.asDiagonal() * solver.eigenvectors();

  // Fix signs: the first entry of clear magnitude is positive.
  for (Eigen::Index c = 0; c < dec.vectors.cols(); ++c) {
    auto col = dec.vectors.col(c);
    const double big = col.cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (std::abs(col(r)) > 1e-8 * big) {
        if (col(r) < 0.0) col *= -1.0;
        break;
      }
    }
  }
  return dec;
}

double inner(const Vector& weights, const Vector& f, const Vector& g) {
  return (weights.array() * f.array() * g.array()).sum();
}

double lp_norm(const Vector& weights, const Vector& f, double p) {
  if (std::isinf(p)) return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
  return std::pow((weights.array() * f.array().abs().pow(p)).sum(), 1.0 / p);
}

Vector coefficients(const SpectralDecomposition& dec, const StateFunction& f) {
  if (f.size() != dec.lambdas.size()) throw std::invalid_argument("function size does not match chain");
  return dec.vectors.transpose() * dec.weights.cwiseProduct(f);
}

Matrix reconstruct_negative_generator(const SpectralDecomposition& dec) {
  // (-L)_{xy} = sum_i lambda_i phi_i(x) phi_i(y) m_y
  return dec.vectors * dec.lambdas.asDiagonal() * dec.vectors.transpose() * dec.weights.asDiagonal();
}

StateFunction apply_semigroup(const SpectralDecomposition& dec, double t, const StateFunction& f) {
  if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: negative time");
  return apply_multiplier(dec, f, [t](double l) { return std::exp(-l * t); });
}

StateFunction apply_poisson(const SpectralDecomposition& dec, double y, const StateFunction& f) {
  if (!(y >= 0.0)) throw std::invalid_argument("apply_poisson: negative height");
  return apply_multiplier(dec, f, [y](double l) { return std::exp(-std::sqrt(l) * y); });
}

StateFunction dy_harmonic(const SpectralDecomposition& dec, double y, const StateFunction& f,
                          int k) {
  if (k < 1) throw std::invalid_argument("dy_harmonic: order must be >= 1 (use apply_poisson for 0)");
  if (!(y >= 0.0)) throw std::invalid_argument("dy_harmonic: negative height");
  return apply_multiplier(dec, f, [y, k](double l) {
    const double r = std::sqrt(l);
    return std::pow(-r, k) * std::exp(-r * y);
  });
}

double null_component_ratio(const SpectralDecomposition& dec, const StateFunction& f) {
  const Vector c = coefficients(dec, f);
  double null2 = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (dec.lambdas(i) == 0.0) null2 += c(i) * c(i);
  const double total2 = c.squaredNorm();
  return total2 == 0.0 ? 0.0 : std::sqrt(null2 / total2);
}

StateFunction fractional_integral_spectral(const SpectralDecomposition& dec, double alpha,
                                           const StateFunction& f) {
  if (!(alpha > 0.0)) throw std::invalid_argument("fractional integral: alpha must be positive");
  const double ratio = null_component_ratio(dec, f);
  if (ratio > kZeroMeanTolerance) {
    std::ostringstream msg;
    msg << "fractional integral diverges: f has a lambda=0 component of relative size " << ratio;
    throw std::invalid_argument(msg.str());
  }
  return apply_multiplier(dec, f, [alpha](double l) { return l > 0.0 ? std::pow(l, -0.5 * alpha) : 0.0; });
}

QuadratureOutcome fractional_integral_quadrature(const Sampler& semigroup, double alpha,
                                                 const SemigroupScales& scales,
                                                 double tolerance) {
  if (!(alpha > 0.0)) throw std::invalid_argument("fractional integral: alpha must be positive");
  if (!(scales.slowest_rate > 0.0) || !(scales.fastest_rate >= scales.slowest_rate)) {
    throw std::invalid_argument("fractional integral: need 0 < slowest_rate <= fastest_rate");
  }
  const double a = 0.5 * alpha;
  const double t_lo = 1e-10 / scales.fastest_rate;
  const double t_hi = 60.0 / scales.slowest_rate;
  const double inv_gamma = 1.0 / boost::math::tgamma(a);

  std::vector<Vector> samples;
  QuadratureOutcome out;
  Vector previous;
  double du = 0.5;
  for (int level = 0; level < 8; ++level, du *= 0.5) {
    const QuadratureRule rule = QuadratureRule::log_lattice(t_lo, t_hi, du, tolerance);
    std::vector<Vector> current(rule.size());
    for (std::size_t k = 0; k < rule.size(); ++k) {
      // Halving the step keeps every old node at an even index.
      current[k] = (level > 0 && k % 2 == 0 && k / 2 < samples.size()) ? samples[k / 2]
                                                                       : semigroup(rule.nodes[k]);
    }
    samples = std::move(current);

    Vector sum = Vector::Zero(samples.front().size());
    for (std::size_t k = 0; k < rule.size(); ++k)
      sum += rule.weights[k] * std::pow(rule.nodes[k], a - 1.0) * samples[k];
    // Lattice points below t_lo, where T_t f = f to first order in t.
    sum += du * std::pow(t_lo, a) * geometric_tail(std::exp(-a * du)) * samples.front();
    sum *= inv_gamma;

    out.nodes = rule.size();
    out.log_step = du;
    if (level > 0) {
      out.refinement_delta = (sum - previous).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, sum.cwiseAbs().maxCoeff());
      if (out.refinement_delta <= tolerance * scale) {
        const double last = samples.back().cwiseAbs().maxCoeff();
        const double rate = scales.slowest_rate;
        const double t_end = rule.nodes.back();
        out.tail_estimate = inv_gamma * last * std::exp(rate * t_end) *
                            boost::math::tgamma(a, rate * t_end) * std::pow(rate, -a);
        if (out.tail_estimate > tolerance * scale) {
          throw QuadratureError("fractional integral: large-t tail above tolerance");
        }
        out.values = std::move(sum);
        return out;
      }
    }
    previous = std::move(sum);
  }
  std::ostringstream msg;
  msg << "fractional integral: no convergence, last refinement change " << out.refinement_delta;
  throw QuadratureError(msg.str());
}

QuadratureOutcome fractional_integral_quadrature(const SpectralDecomposition& dec, double alpha,
                                                 const StateFunction& f, double tolerance) {
  const double ratio = null_component_ratio(dec, f);
  if (ratio > kZeroMeanTolerance) {
    std::ostringstream msg;
    msg << "fractional integral diverges: f has a lambda=0 component of relative size " << ratio;
    throw std::invalid_argument(msg.str());
  }
  if (f.cwiseAbs().maxCoeff() == 0.0 || !std::isfinite(dec.gap())) {
    QuadratureOutcome zero;
    zero.values = Vector::Zero(f.size());
    return zero;
  }
  const Vector c = coefficients(dec, f);
  const Sampler semigroup = [&dec, &c](double t) {
    Vector scaled = c;
    for (Eigen::Index i = 0; i < c.size(); ++i)
      scaled(i) = dec.lambdas(i) > 0.0 ? c(i) * std::exp(-dec.lambdas(i) * t) : 0.0;
    return Vector(dec.vectors * scaled);
  };
  return fractional_integral_quadrature(semigroup, alpha, {dec.gap(), dec.max_eigenvalue()}, tolerance);
}

}  // namespace shls::spectral
