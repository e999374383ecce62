#include "shls/functionals.hpp"

#include "shls/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace shls::functionals {

namespace {

// Lattice terms below the first node when the integrand (in u = log y)
// behaves like y^power there.
double lower_tail(const YGrid& grid, double power) {
  return grid.log_step * std::pow(grid.nodes.front(), power) * geometric_tail(std::exp(-power * grid.log_step));
}

}  // namespace

YGrid make_y_grid(const spectral::SpectralDecomposition& dec, int count) {
  if (count < 8) throw std::invalid_argument("y-grid: need at least 8 nodes");
  const double top = dec.max_eigenvalue();
  const double gap = dec.gap();
  const double lo = top > 0.0 ? 1e-4 / std::sqrt(top) : 1e-4;
  const double hi = std::isfinite(gap) ? 30.0 / std::sqrt(gap) : 30.0;
  YGrid g;
  g.log_step = std::log(hi / lo) / (count - 1);
  for (int k = 0; k < count; ++k) {
    const double y = lo * std::exp(k * g.log_step);
    g.nodes.push_back(y);
    g.weights.push_back(g.log_step * y);
  }
  return g;
}

HalfSpaceField::HalfSpaceField(const spectral::SpectralDecomposition& dec, StateFunction f,
                               std::vector<int> orders, int count)
    : dec_(&dec), f_(std::move(f)), grid_(make_y_grid(dec, count)) {
  if (f_.size() != dec.lambdas.size()) throw std::invalid_argument("HalfSpaceField: function size mismatch");
  const Vector c = spectral::coefficients(dec, f_);
  const Vector root = dec.lambdas.cwiseSqrt();
  for (int k : orders) {
    if (k < 0 || k > 3) throw std::invalid_argument("HalfSpaceField: derivative order must be 0..3");
    auto& store = derivatives_[k];
    store.reserve(grid_.nodes.size());
    for (double y : grid_.nodes) {
      Vector scaled(c.size());
      for (Eigen::Index i = 0; i < c.size(); ++i) scaled(i) = c(i) * std::pow(-root(i), k) * std::exp(-root(i) * y);
      store.push_back(dec.vectors * scaled);
    }
  }
}

const Vector& HalfSpaceField::derivative(int k, std::size_t i) const {
  const auto it = derivatives_.find(k);
  if (it == derivatives_.end()) throw std::invalid_argument("HalfSpaceField: order " + std::to_string(k) + " not stored");
  return it->second.at(i);
}

StateFunction g_function(const HalfSpaceField& hs, int k) {
  if (k < 1) throw std::invalid_argument("g_function: k >= 1");
  const auto& g = hs.grid();
  Vector sum = Vector::Zero(hs.base().size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    sum += g.weights[i] * std::pow(g.nodes[i], 2 * k - 1) * hs.derivative(k, i).array().square().matrix();
  }
  sum += lower_tail(g, 2.0 * k) * hs.derivative(k, 0).array().square().matrix();
  return sum.cwiseSqrt();
}

StateFunction frac_g_function(const HalfSpaceField& hs, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("frac_g_function: alpha > 0");
  const auto& g = hs.grid();
  Vector sum = Vector::Zero(hs.base().size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    sum += g.weights[i] * std::pow(g.nodes[i], 2.0 * alpha + 1.0) * hs.derivative(1, i).array().square().matrix();
  }
  sum += lower_tail(g, 2.0 * alpha + 2.0) * hs.derivative(1, 0).array().square().matrix();
  return sum.cwiseSqrt();
}

StateFunction maximal_function(const HalfSpaceField& hs) {
  Vector m = hs.base().cwiseAbs();
  for (std::size_t i = 0; i < hs.grid().nodes.size(); ++i) m = m.cwiseMax(hs.derivative(0, i).cwiseAbs());
  return m;
}

CheckReport stein_check(const HalfSpaceField& hs, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("stein_check: p > 1");
  CheckReport r;
  r.name = "stein-maximal";
  r.anchor = "||sup_y |u_f(., y)| ||_p <= p/(p-1) ||f||_p";
  r.oracle = std::isinf(p) ? 1.0 : p / (p - 1.0);
  r.tolerance = 1e-9;
  r.comparison = Comparison::upper_bound;
  r.details["p"] = std::isinf(p) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(p);
  const auto& w = hs.decomposition().weights;
  const double fp = spectral::lp_norm(w, hs.base(), p);
  if (fp == 0.0) {
    r.status = Status::skipped;
    r.note = "f = 0";
    return r;
  }
  r.value = spectral::lp_norm(w, maximal_function(hs), p) / fp;
  return r.decide();
}

HedbergSplit hedberg_split(const HedbergInput& in) {
  if (!(in.M >= 0.0) || !(in.F >= 0.0)) throw std::invalid_argument("hedberg: M and F must be >= 0");
  if (!(in.alpha > 0.0) || !(in.alpha < in.d / in.p)) throw std::invalid_argument("hedberg: need 0 < alpha < d/p");
  if (in.M == 0.0) return {kInf, 0.0};
  if (in.F == 0.0) return {0.0, 0.0};
  const double e = in.d / in.p;
  const double delta = std::pow((e - in.alpha) * in.F / (in.alpha * in.M), 1.0 / e);
  return {delta, in.M * std::pow(delta, in.alpha) + in.F * std::pow(delta, in.alpha - e)};
}

double pairing_quadrature(const HalfSpaceField& hs_f, const HalfSpaceField& hs_h, double alpha,
                          const PairingOptions& opt) {
  if (!(alpha > 0.0)) throw std::invalid_argument("pairing: alpha > 0");
  if (!(opt.s > 0.0) || !(opt.truncation > 0.0)) throw std::invalid_argument("pairing: s and N must be positive");
  if (&hs_f.decomposition() != &hs_h.decomposition() || hs_f.grid().nodes != hs_h.grid().nodes) {
    throw std::invalid_argument("pairing: fields must share chain and y-grid");
  }
  const auto& g = hs_f.grid();
  const auto& m = hs_f.decomposition().weights;
  const auto product = [&](std::size_t i) {
    const Vector& a = hs_f.derivative(1, i);
    const Vector& b = hs_h.derivative(1, i);
    return opt.absolute ? (m.array() * a.array().abs() * b.array().abs()).sum()
                        : (m.array() * a.array() * b.array()).sum();
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double y = g.nodes[i];
    sum += g.weights[i] * std::min(y, opt.s) * std::min(std::pow(y, alpha), opt.truncation) * product(i);
  }
  const double y0 = g.nodes.front();
  if (y0 < opt.s && std::pow(y0, alpha) < opt.truncation) sum += lower_tail(g, alpha + 2.0) * product(0);
  return 2.0 * sum;
}

double pairing_spectral(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                        const StateFunction& h, double alpha) {
  const Vector cf = spectral::coefficients(dec, f);
  const Vector ch = spectral::coefficients(dec, h);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < cf.size(); ++i)
    if (dec.lambdas(i) > 0.0) sum += std::pow(dec.lambdas(i), -0.5 * alpha) * cf(i) * ch(i);
  return 2.0 * boost::math::tgamma(alpha + 2.0) * std::pow(2.0, -(alpha + 2.0)) * sum;
}

double pairing_spectral(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                        const StateFunction& h, double alpha, double s) {
  if (std::isinf(s)) return pairing_spectral(dec, f, h, alpha);
  const Vector cf = spectral::coefficients(dec, f);
  const Vector ch = spectral::coefficients(dec, h);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < cf.size(); ++i) {
    const double l = dec.lambdas(i);
    if (l <= 0.0) continue;
    const double b = 2.0 * std::sqrt(l);
    const double inner = std::pow(b, -(alpha + 2.0)) * boost::math::tgamma_lower(alpha + 2.0, b * s) +
                         s * std::pow(b, -(alpha + 1.0)) * boost::math::tgamma(alpha + 1.0, b * s);
    sum += l * cf(i) * ch(i) * inner;
  }
  return 2.0 * sum;
}

void write_profile_csv(std::ostream& out, const HalfSpaceField& hs_f, const HalfSpaceField& hs_h,
                       double alpha, Eigen::Index x) {
  out << "y,g1,G_alpha,pairing\n" << std::setprecision(12);
  const auto& g = hs_f.grid();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double y = g.nodes[i];
    const double df = hs_f.derivative(1, i)(x);
    const double dh = hs_h.derivative(1, i)(x);
    out << y << ',' << y * df * df << ',' << std::pow(y, 2.0 * alpha + 1.0) * df * df << ','
        << 2.0 * y * std::pow(y, alpha) * df * dh << '\n';
  }
}

double gfunction_ratio(const continuum::GridField& f, double alpha, double p) {
  const double q = continuum::hls_exponent(f.spec.d, alpha, p);
  const double fp = f.lp_norm(p);
  if (fp == 0.0) return 0.0;
  const auto hist = continuum::HeatHistory::full(f);
  continuum::GridField G(f.spec);
  G.values = hist.frac_g_function(alpha);
  return G.lp_norm(q) / fp;
}

CheckReport hls_gfunction_check(const continuum::HlsSetup& setup, double tolerance) {
  CheckReport r;
  r.name = "hls-gfunction-stability";
  r.anchor = "||G_alpha f||_q <= C ||f||_p, 1/q = 1/p - alpha/d";
  r.oracle = 0.0;
  r.tolerance = tolerance;
  r.comparison = Comparison::upper_bound;
  const double q = continuum::hls_exponent(setup.d, setup.alpha, setup.p);
  std::vector<double> coarse, fine;
  for (double dil : setup.dilations) {
    const auto base = continuum::gaussian_profile(setup.sigma_f);
    const auto f = [&base, dil](const continuum::Point& x) {
      continuum::Point z = x;
      for (double& c : z) c *= dil;
      return base(z);
    };
    for (int n : {setup.n_coarse, setup.n_fine}) {
      const continuum::GridSpec spec{setup.d, n, setup.extent};
      (n == setup.n_coarse ? coarse : fine).push_back(gfunction_ratio(continuum::GridField::sample(spec, f), setup.alpha, setup.p));
    }
  }
  double refinement = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) refinement = std::max(refinement, std::abs(coarse[i] - fine[i]) / fine[i]);
  const auto [lo, hi] = std::minmax_element(fine.begin(), fine.end());
  const double dilation = (*hi - *lo) / *lo;
  r.value = std::max(refinement, dilation);
  r.details["q"] = q;
  r.details["dilations"] = setup.dilations;
  r.details["ratio_coarse"] = coarse;
  r.details["ratio_fine"] = fine;
  r.details["refinement_drift"] = refinement;
  r.details["dilation_drift"] = dilation;
  return r.decide();
}

}  // namespace shls::functionals
