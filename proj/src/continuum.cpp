#include "shls/continuum.hpp"

#include "shls/quadrature.hpp"
#include "shls/stats.hpp"
#include "shls/subordination.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace shls::continuum {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

bool all_zero(const GridField& f) { return f.max_abs() == 0.0; }

// Applies K along one axis of `in`, writing `out`. Lines are independent.
void convolve_axis(const std::vector<double>& in, std::vector<double>& out, const GridSpec& spec,
                   int axis, const std::vector<double>& kernel) {
  const std::size_t n = static_cast<std::size_t>(spec.n);
  std::size_t stride = 1;
  for (int a = spec.d - 1; a > axis; --a) stride *= n;
  const std::size_t lines = in.size() / n;
  const auto line_count = static_cast<long long>(lines);

#pragma omp parallel
  {
    std::vector<double> buf(n);
#pragma omp for schedule(static)
    for (long long L = 0; L < line_count; ++L) {
      const auto l = static_cast<std::size_t>(L);
      const std::size_t base = (l / stride) * n * stride + l % stride;
      for (std::size_t i = 0; i < n; ++i) buf[i] = in[base + i * stride];
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += kernel[i > j ? i - j : j - i] * buf[j];
        out[base + i * stride] = acc;
      }
    }
  }
}

double gaussian_weight_sum(int d, double spacing, double exponent, int stride) {
  // sum over z in (stride h) Z^d \ {0} of exp(-|z|^2/2) |z|^exponent (stride h)^d
  const double step = spacing * stride;
  const int R = static_cast<int>(std::ceil(9.0 / step));
  const int w = 2 * R + 1;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(w);
  double sum = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rest = k;
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const int z = static_cast<int>(rest % static_cast<std::size_t>(w)) - R;
      rest /= static_cast<std::size_t>(w);
      r2 += (z * step) * (z * step);
    }
    if (r2 == 0.0) continue;
    sum += std::exp(-0.5 * r2) * std::pow(r2, 0.5 * exponent);
  }
  return sum * std::pow(step, d);
}

// Punctured sum over nodes j with (j - node) divisible by stride.
double punctured_sum(const GridField& f, const Index& node, double exponent, int stride) {
  const GridSpec& s = f.spec;
  const double h = s.spacing();
  double sum = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double v = f.values[k];
    if (v == 0.0) continue;
    const Index j = s.unravel(k);
    double r2 = 0.0;
    bool on_lattice = true;
    for (int a = 0; a < s.d; ++a) {
      const int diff = j[a] - node[a];
      if (diff % stride != 0) {
        on_lattice = false;
        break;
      }
      r2 += (diff * h) * (diff * h);
    }
    if (!on_lattice || r2 == 0.0) continue;
    sum += v * std::pow(r2, 0.5 * exponent);
  }
  return sum * std::pow(h * stride, s.d);
}

struct RieszPlan {
  double constant;
  double exponent;
  double richardson;
  double w_fine;
  double w_coarse;
  double gaussian_integral;
};

RieszPlan riesz_plan(const GridField& field, double alpha) {
  const int d = field.spec.d;
  RieszPlan plan;
  plan.constant = riesz_constant(d, alpha);
  plan.exponent = alpha - d;
  plan.richardson = std::pow(2.0, alpha + 2.0);
  const double h = field.spec.spacing();
  plan.w_fine = gaussian_weight_sum(d, h, plan.exponent, 1);
  plan.w_coarse = gaussian_weight_sum(d, h, plan.exponent, 2);
  const double sphere = 2.0 * std::pow(kPi, 0.5 * d) / boost::math::tgamma(0.5 * d);
  plan.gaussian_integral = sphere * 0.5 * std::pow(2.0, 0.5 * alpha) * boost::math::tgamma(0.5 * alpha);
  return plan;
}

void check_nodes(const GridSpec& s, const std::vector<Index>& nodes) {
  for (const auto& node : nodes) {
    for (int a = 0; a < s.d; ++a) {
      if (node[a] < 1 || node[a] > s.n - 2) {
        std::ostringstream msg;
        msg << "riesz_apply: node index " << node[a] << " on axis " << a
            << " is within one cell of the boundary";
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

double riesz_at(const GridField& f, const RieszPlan& plan, const Index& node) {
  const double fx = f.values[f.spec.linear(node)];
  const double fine = punctured_sum(f, node, plan.exponent, 1) - fx * plan.w_fine;
  const double coarse = punctured_sum(f, node, plan.exponent, 2) - fx * plan.w_coarse;
  const double extrapolated = (plan.richardson * fine - coarse) / (plan.richardson - 1.0);
  return plan.constant * (extrapolated + fx * plan.gaussian_integral);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return out;
}

CheckReport slope_report(const std::vector<double>& xs, const std::vector<double>& ys, double target) {
  CheckReport r;
  r.oracle = target;
  r.tolerance = 0.05;
  r.comparison = Comparison::relative;
  const auto fit = stats::loglog_fit(xs, ys);
  r.value = fit.slope;
  r.details["r_squared"] = fit.r_squared;
  r.details["abscissae"] = xs;
  r.details["values"] = ys;
  if (fit.r_squared < 0.99) {
    r.status = Status::inconclusive;
    r.note = "fit R^2 below 0.99; window not asymptotic";
    return r;
  }
  return r.decide();
}

}  // namespace

Profile gaussian_profile(double sigma) {
  return [sigma](const Point& x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::exp(-r2 / (2.0 * sigma * sigma));
  };
}

double heat_kernel_value(double t, double h, double offset) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat kernel: negative time");
  if (t == 0.0) return offset == 0.0 ? 1.0 : std::sin(kPi * offset) / (kPi * offset);
  const double b = t * (kPi / h) * (kPi / h);
  if (b >= 40.0) {
    const double x = offset * h;
    return h / std::sqrt(4.0 * kPi * t) * std::exp(-x * x / (4.0 * t));
  }
  const int panels = static_cast<int>(std::ceil(std::abs(offset) / 2.0)) + 4;
  const auto integrand = [b, offset](double v) { return std::exp(-b * v * v) * std::cos(kPi * offset * v); };
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    sum += boost::math::quadrature::gauss<double, 20>::integrate(integrand, static_cast<double>(k) / panels,
                                                                 static_cast<double>(k + 1) / panels);
  }
  return sum;
}

std::vector<double> heat_kernel_1d(const GridSpec& spec, double t) {
  std::vector<double> k(static_cast<std::size_t>(spec.n));
  for (int m = 0; m < spec.n; ++m) k[static_cast<std::size_t>(m)] = heat_kernel_value(t, spec.spacing(), m);
  return k;
}

GridField heat_apply(const GridField& field, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat_apply: negative time");
  GridField out = field;
  check_boundary(out);
  if (t == 0.0) return out;
  const auto kernel = heat_kernel_1d(field.spec, t);
  std::vector<double> scratch(field.values.size());
  for (int axis = 0; axis < field.spec.d; ++axis) {
    convolve_axis(out.values, scratch, field.spec, axis, kernel);
    out.values.swap(scratch);
  }
  return out;
}

double heat_apply_at(const GridField& field, double t, const Point& x) {
  const GridSpec& s = field.spec;
  const double h = s.spacing();
  std::vector<double> cur = field.values;
  for (int axis = s.d - 1; axis >= 0; --axis) {
    std::vector<double> w(static_cast<std::size_t>(s.n));
    for (int j = 0; j < s.n; ++j) w[static_cast<std::size_t>(j)] = heat_kernel_value(t, h, (x[axis] - s.coord(j)) / h);
    std::vector<double> next(cur.size() / static_cast<std::size_t>(s.n));
    for (std::size_t k = 0; k < next.size(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) acc += cur[k * w.size() + j] * w[j];
      next[k] = acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

double riesz_constant(int d, double alpha) {
  if (d < 1) throw std::invalid_argument("riesz_constant: d must be positive");
  if (alpha < 1e-3 || alpha >= d) throw std::invalid_argument("riesz_constant: need 1e-3 <= alpha < d");
  return boost::math::tgamma(0.5 * (d - alpha)) /
         (std::pow(2.0, alpha) * std::pow(kPi, 0.5 * d) * boost::math::tgamma(0.5 * alpha));
}

std::vector<double> riesz_apply(const GridField& field, double alpha, const std::vector<Index>& nodes) {
  check_nodes(field.spec, nodes);
  const RieszPlan plan = riesz_plan(field, alpha);
  std::vector<double> out(nodes.size());
  const auto count = static_cast<long long>(nodes.size());
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = riesz_at(field, plan, nodes[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace reference {

GridField heat_apply(const GridField& field, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat_apply: negative time");
  const GridSpec& s = field.spec;
  const auto kernel = heat_kernel_1d(s, t);
  GridField cur = field;
  if (t == 0.0) return cur;
  for (int axis = 0; axis < s.d; ++axis) {
    GridField next(s);
    for (std::size_t k = 0; k < cur.values.size(); ++k) {
      Index idx = s.unravel(k);
      const int i = idx[axis];
      double acc = 0.0;
      for (int j = 0; j < s.n; ++j) {
        idx[axis] = j;
        acc += kernel[static_cast<std::size_t>(std::abs(i - j))] * cur.values[s.linear(idx)];
      }
      next.values[k] = acc;
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> riesz_apply(const GridField& field, double alpha, const std::vector<Index>& nodes) {
  check_nodes(field.spec, nodes);
  const RieszPlan plan = riesz_plan(field, alpha);
  std::vector<double> out;
  for (const auto& node : nodes) out.push_back(riesz_at(field, plan, node));
  return out;
}

}  // namespace reference

HeatHistory HeatHistory::full(const GridField& f, double log_step) {
  f.spec.validate();
  HeatHistory hist;
  hist.d_ = f.spec.d;
  hist.h_ = f.spec.spacing();
  hist.extent_ = f.spec.extent;
  hist.mass_ = f.mass();
  hist.log_step_ = log_step;
  const auto rule = QuadratureRule::log_lattice(1e-8 * hist.h_ * hist.h_, 1e6 * hist.extent_ * hist.extent_, log_step);
  hist.times_ = rule.nodes;
  hist.initial_ = f.values;
  hist.values_.reserve(rule.size());
  for (double s : rule.nodes) hist.values_.push_back(heat_apply(f, s).values);
  return hist;
}

HeatHistory HeatHistory::at_points(const GridField& f, const std::vector<Point>& points, double log_step) {
  f.spec.validate();
  HeatHistory hist;
  hist.d_ = f.spec.d;
  hist.h_ = f.spec.spacing();
  hist.extent_ = f.spec.extent;
  hist.mass_ = f.mass();
  hist.log_step_ = log_step;
  const auto rule = QuadratureRule::log_lattice(1e-8 * hist.h_ * hist.h_, 1e6 * hist.extent_ * hist.extent_, log_step);
  hist.times_ = rule.nodes;
  for (const auto& x : points) hist.initial_.push_back(heat_apply_at(f, 0.0, x));
  hist.values_.resize(rule.size());
  const auto count = static_cast<long long>(rule.size());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < count; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    std::vector<double> row;
    row.reserve(points.size());
    for (const auto& x : points) row.push_back(heat_apply_at(f, rule.nodes[kk], x));
    hist.values_[kk] = std::move(row);
  }
  return hist;
}

std::vector<double> HeatHistory::fractional_integral(double alpha) const {
  const double a = 0.5 * alpha;
  if (!(a > 0.0) || !(a < 0.5 * d_)) throw std::invalid_argument("fractional integral: need 0 < alpha < d");
  const double du = log_step_;
  const double inv_gamma = 1.0 / boost::math::tgamma(a);
  std::vector<double> out(locations(), 0.0);
  for (std::size_t k = 0; k < times_.size(); ++k) {
    const double w = du * std::pow(times_[k], a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * values_[k][i];
  }
  const double lower = du * std::pow(times_.front(), a) * geometric_tail(std::exp(-a * du));
  const double upper = du * mass_ * std::pow(4.0 * kPi, -0.5 * d_) * std::pow(times_.back(), a - 0.5 * d_) *
                       geometric_tail(std::exp((a - 0.5 * d_) * du));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv_gamma * (out[i] + lower * initial_[i] + upper);
  return out;
}

template <class Kernel>
std::vector<double> HeatHistory::subordinate(double y, Kernel kernel) const {
  if (!(y > 0.0)) throw std::invalid_argument("subordination: height must be positive");
  const double du = log_step_;
  std::vector<double> out(locations(), 0.0);
  for (std::size_t k = 0; k < times_.size(); ++k) {
    const double w = du * times_[k] * kernel(y, times_[k]);
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * values_[k][i];
  }
  double tail = 0.0;
  const double u_end = std::log(times_.back());
  for (int j = 1; j < 100000; ++j) {
    const double s = std::exp(u_end + j * du);
    const double term = du * s * kernel(y, s) * std::pow(4.0 * kPi * s, -0.5 * d_);
    tail += term;
    if (std::abs(term) <= 1e-17 * std::abs(tail)) break;
  }
  for (double& v : out) v += tail * mass_;
  return out;
}

std::vector<double> HeatHistory::poisson(double y) const {
  return subordinate(y, [](double yy, double s) { return subordination::density(yy, s); });
}

std::vector<double> HeatHistory::poisson_dy(double y) const {
  return subordinate(y, [](double yy, double s) { return subordination::density_dy(yy, s); });
}

std::vector<double> HeatHistory::frac_g_function(double alpha) const {
  if (!(alpha > 0.0) || !(alpha < d_)) throw std::invalid_argument("frac_g_function: need 0 < alpha < d");
  const double du = 0.1;
  const auto rule = QuadratureRule::log_lattice(0.01 * h_, 50.0 * extent_, du);
  std::vector<double> sum(locations(), 0.0);
  std::vector<double> first, last;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double y = rule.nodes[k];
    const auto dy = poisson_dy(y);
    const double w = rule.weights[k] * std::pow(y, 2.0 * alpha + 1.0);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += w * dy[i] * dy[i];
    if (k == 0) first = dy;
    if (k + 1 == rule.size()) last = dy;
  }
  // Below: du/dy tends to a constant. Above: du/dy ~ y^{-d-1}.
  const double y0 = rule.nodes.front(), y1 = rule.nodes.back();
  const double lower = du * std::pow(y0, 2.0 * alpha + 2.0) * geometric_tail(std::exp(-(2.0 * alpha + 2.0) * du));
  const double upper = du * std::pow(y1, 2.0 * alpha + 2.0) * geometric_tail(std::exp((2.0 * alpha - 2.0 * d_) * du));
  for (std::size_t i = 0; i < sum.size(); ++i) {
    sum[i] = std::sqrt(sum[i] + lower * first[i] * first[i] + upper * last[i] * last[i]);
  }
  return sum;
}

CheckReport varopoulos_slope(const GridSpec& spec, const Profile& g, double p, Window window, int samples) {
  spec.validate();
  CheckReport r;
  r.name = "varopoulos-slope";
  r.anchor = "||T_t f||_inf <= c t^{-d/2p} ||f||_p";
  r.details["p"] = p;
  r.details["family"] = "f_t(x) = g(x sqrt(t_lo/t))";
  if (all_zero(GridField::sample(spec, g))) {
    r.status = Status::skipped;
    r.note = "f = 0";
    return r;
  }
  const auto times = log_grid(window.lo, window.hi, samples);
  std::vector<double> values;
  for (double t : times) {
    const double lambda = std::sqrt(t / window.lo);
    const auto f = GridField::sample(spec, [&g, lambda](const Point& x) {
      Point z = x;
      for (double& c : z) c /= lambda;
      return g(z);
    });
    const auto Tf = heat_apply(f, t);
    const double sup = std::max(Tf.max_abs(), std::abs(heat_apply_at(f, t, Point{})));
    values.push_back(sup / f.lp_norm(p));
  }
  CheckReport fit = slope_report(times, values, -spec.d / (2.0 * p));
  fit.name = r.name;
  fit.anchor = r.anchor;
  fit.details.update(r.details);
  return fit;
}

CheckReport poisson_dimension_check(const GridSpec& spec, const Profile& g, double p, Window window,
                                    int samples) {
  spec.validate();
  CheckReport r;
  r.name = "poisson-dimension";
  r.anchor = "||P_y f||_inf <= c y^{-d/p} ||f||_p";
  r.details["p"] = p;
  r.details["family"] = "f_y(x) = g(x y_lo/y)";
  if (all_zero(GridField::sample(spec, g))) {
    r.status = Status::skipped;
    r.note = "f = 0";
    return r;
  }
  const auto heights = log_grid(window.lo, window.hi, samples);
  std::vector<double> values;
  for (double y : heights) {
    const double lambda = y / window.lo;
    const auto f = GridField::sample(spec, [&g, lambda](const Point& x) {
      Point z = x;
      for (double& c : z) c /= lambda;
      return g(z);
    });
    const auto hist = HeatHistory::at_points(f, {Point{}});
    values.push_back(std::abs(hist.poisson(y)[0]) / f.lp_norm(p));
  }
  CheckReport fit = slope_report(heights, values, -spec.d / p);
  fit.name = r.name;
  fit.anchor = r.anchor;
  fit.details.update(r.details);
  return fit;
}

double hls_exponent(int d, double alpha, double p) {
  const double inv_q = 1.0 / p - alpha / d;
  if (!(p > 1.0) || !(inv_q > 0.0)) {
    std::ostringstream msg;
    msg << "HLS exponents: need 1 < p and 1/q = 1/p - alpha/d > 0 (p = " << p << ", alpha = " << alpha
        << ", d = " << d << ")";
    throw std::invalid_argument(msg.str());
  }
  return 1.0 / inv_q;
}

double hls_ratio(const GridField& f, const GridField& h, double alpha, double p) {
  const double q = hls_exponent(f.spec.d, alpha, p);
  const double q_dual = q / (q - 1.0);
  if (all_zero(f) || all_zero(h)) return 0.0;
  const auto hist = HeatHistory::full(f);
  const auto If = hist.fractional_integral(alpha);
  double pairing = 0.0;
  for (std::size_t k = 0; k < If.size(); ++k) pairing += If[k] * h.values[k];
  pairing *= f.spec.cell_volume();
  return std::abs(pairing) / (f.lp_norm(p) * h.lp_norm(q_dual));
}

CheckReport hls_ratio_check(const HlsSetup& setup, double tolerance) {
  CheckReport r;
  r.name = "hls-ratio-stability";
  r.anchor = "|<I_alpha f, h>| <= C ||f||_p ||h||_q', 1/q = 1/p - alpha/d";
  r.oracle = 0.0;
  r.tolerance = tolerance;
  r.comparison = Comparison::upper_bound;
  const double q = hls_exponent(setup.d, setup.alpha, setup.p);
  std::vector<double> coarse, fine;
  for (double dil : setup.dilations) {
    const auto f = [&setup, dil](const Point& x) { Point z = x; for (double& c : z) c *= dil; return gaussian_profile(setup.sigma_f)(z); };
    const auto h = [&setup, dil](const Point& x) { Point z = x; for (double& c : z) c *= dil; return gaussian_profile(setup.sigma_h)(z); };
    for (int n : {setup.n_coarse, setup.n_fine}) {
      const GridSpec spec{setup.d, n, setup.extent};
      const double ratio = hls_ratio(GridField::sample(spec, f), GridField::sample(spec, h), setup.alpha, setup.p);
      (n == setup.n_coarse ? coarse : fine).push_back(ratio);
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

}  // namespace shls::continuum
