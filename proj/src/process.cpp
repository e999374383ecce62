#include "shls/process.hpp"

#include "shls/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace shls::process {

namespace {

constexpr std::uint64_t kJumpStream = std::uint64_t{1} << 63;
constexpr std::uint64_t kBridgeStream = std::uint64_t{1} << 62;
constexpr std::uint64_t kKillStream = std::uint64_t{1} << 61;
constexpr std::size_t kMaxWidth = 8;
constexpr double kTwoPi = 6.283185307179586;

}  // namespace

ProcessConfig ProcessConfig::for_chain(spectral::ChainModel chain) {
  spectral::validate(chain);
  ProcessConfig cfg;
  cfg.dec = spectral::decompose(chain);
  cfg.chain = std::move(chain);
  return cfg;
}

void ProcessConfig::validate() const {
  if (chain.size() == 0 || dec.size() != chain.size())
    throw std::invalid_argument("process: chain and decomposition disagree");
  if (!(s > 0.0)) throw std::invalid_argument("process: s must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("process: dt must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("process: kappa must be positive");
  if (!(truncation > 0.0)) throw std::invalid_argument("process: truncation must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("process: horizon must be positive");
  if (refinement != 0 && refinement != 1) throw std::invalid_argument("process: refinement is 0 or 1");
}

GreenIntegrand indicator_below(double level) {
  if (!(level > 0.0)) throw std::invalid_argument("indicator_below: level must be positive");
  std::ostringstream label;
  label << "1{y<=" << level << "}";
  // the ceiling sits inside the zero region, off the jump
  return {label.str(), [level](Eigen::Index, double y) { return y <= level ? 1.0 : 0.0; }, {level},
          1.25 * level};
}

GreenIntegrand power_exponential(double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("power_exponential: alpha >= 0");
  // beyond the ceiling, y^{alpha+1} e^{-y} < 1e-13
  double ceiling = alpha + 1.0;
  while ((alpha + 1.0) * std::log(ceiling) - ceiling > std::log(1e-13)) ceiling += 0.25;
  std::ostringstream label;
  label << "y^" << alpha << " e^-y";
  return {label.str(), [alpha](Eigen::Index, double y) { return std::pow(y, alpha) * std::exp(-y); }, {},
          ceiling};
}

FunctionIntegrands::FunctionIntegrands(std::vector<GreenIntegrand> terms) : terms_(std::move(terms)) {
  if (terms_.empty() || terms_.size() > kMaxWidth) throw std::invalid_argument("FunctionIntegrands: 1..8 terms");
  ceiling_ = 0.0;
  for (const auto& t : terms_) {
    if (!std::isfinite(t.ceiling)) throw std::invalid_argument("FunctionIntegrands: " + t.label + " has no ceiling");
    ceiling_ = std::max(ceiling_, t.ceiling);
  }
}

void FunctionIntegrands::evaluate(Eigen::Index x, double y, StochasticValue*, double* b) const {
  for (std::size_t j = 0; j < terms_.size(); ++j) b[j] = terms_[j].F(x, y);
}

HarmonicIntegrands::HarmonicIntegrands(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                                       const StateFunction& h, double alpha, double truncation)
    : alpha_(alpha), truncation_(truncation), knee_(std::pow(truncation, 1.0 / alpha)) {
  if (!(alpha > 0.0)) throw std::invalid_argument("HarmonicIntegrands: alpha > 0");
  if (!(truncation > 0.0)) throw std::invalid_argument("HarmonicIntegrands: truncation > 0");
  const Vector cf = spectral::coefficients(dec, f);
  const Vector ch = spectral::coefficients(dec, h);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < dec.lambdas.size(); ++i)
    if (dec.lambdas(i) > 0.0) keep.push_back(i);
  const auto k = static_cast<Eigen::Index>(keep.size());
  roots_.resize(k);
  cf_.resize(k);
  ch_.resize(k);
  phi_.resize(dec.vectors.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    roots_(j) = std::sqrt(dec.lambdas(keep[j]));
    cf_(j) = cf(keep[j]);
    ch_(j) = ch(keep[j]);
    phi_.col(j) = dec.vectors.col(keep[j]);
  }
  const double gap = dec.gap();
  if (!std::isfinite(gap)) {
    ceiling_ = 0.0;
    growth_ = 1.0;
    return;
  }
  // every integrand is O(e^{-2 sqrt(gap) y} (1 + y)^{alpha+2}) at large y
  const double b = 2.0 * std::sqrt(gap);
  const double power = alpha + 2.0;
  const auto log_envelope = [&](double y) { return -b * y + power * std::log1p(y); };
  double y = std::max(0.0, power / b - 1.0);
  const double step = 0.01 / std::sqrt(gap);
  while (log_envelope(y) > std::log(1e-9)) y += step;
  ceiling_ = y;
  growth_ = std::log(1e3) / b;
}

double HarmonicIntegrands::weighted_laplace(double r, double y, double decay) const {
  const double head = std::min(y, knee_);
  double out;
  if (alpha_ == 1.0) {
    const double ry = r * head;
    const double e = y > knee_ ? std::exp(-ry) : decay;
    // (1 - (1 + ry) e^{-ry}) / r^2, by series when ry is small
    out = ry < 1e-3 ? head * head * (0.5 - ry / 3.0 + ry * ry / 8.0) : (1.0 - e - ry * e) / (r * r);
  } else {
    out = boost::math::tgamma_lower(alpha_ + 1.0, r * head) / std::pow(r, alpha_ + 1.0);
  }
  if (y > knee_) out += truncation_ * (std::exp(-r * knee_) - decay) / r;
  return out;
}

void HarmonicIntegrands::evaluate(Eigen::Index x, double y, StochasticValue* a, double* b) const {
  double df = 0.0, dh = 0.0, ddf = 0.0, prim = 0.0;
  for (Eigen::Index j = 0; j < roots_.size(); ++j) {
    const double r = roots_(j);
    const double decay = std::exp(-r * y);
    const double e = decay * phi_(x, j);
    df -= cf_(j) * r * e;
    dh -= ch_(j) * r * e;
    ddf += cf_(j) * r * r * e;
    prim -= cf_(j) * r * phi_(x, j) * weighted_laplace(r, y, decay);
  }
  const double power = alpha_ == 1.0 ? y : std::pow(y, alpha_);
  const bool capped = power >= truncation_;
  const double w = capped ? truncation_ : power;
  double w_dy = 0.0;
  if (!capped) {
    if (y > 0.0) w_dy = alpha_ * power / y;
    else w_dy = alpha_ == 1.0 ? 1.0 : (alpha_ < 1.0 ? kInf : 0.0);
  }
  a[0] = {w * df, w_dy * df + w * ddf, prim};
  b[0] = w * df * dh;
  b[1] = w * w * df * df;
}

std::size_t PathBundle::censored_count() const {
  return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), std::uint8_t{1}));
}

void PathBundle::write_csv(std::ostream& out) const {
  out << "path,x0,x_tau,tau,censored,steps";
  for (std::size_t j = 0; j < stochastic_width; ++j) out << ",SI" << j;
  for (std::size_t j = 0; j < time_width; ++j) out << ",TI" << j;
  for (std::size_t j = 0; j < checkpoint_width; ++j) out << ",x_c" << j << ",y_c" << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t p = 0; p < count; ++p) {
    out << p << ',' << x0[p] << ',' << x_tau[p] << ',' << tau[p] << ',' << int(censored[p]) << ',' << steps[p];
    for (std::size_t j = 0; j < stochastic_width; ++j) out << ',' << stochastic[p * stochastic_width + j];
    for (std::size_t j = 0; j < time_width; ++j) out << ',' << time[p * time_width + j];
    for (std::size_t j = 0; j < checkpoint_width; ++j)
      out << ',' << checkpoint_x[p * checkpoint_width + j] << ',' << checkpoint_y[p * checkpoint_width + j];
    out << '\n';
  }
}

namespace {

std::size_t sample_cumulative(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

// Hitting time of 0 from y given that it is at most len: T = y^2 / Z^2
// with Z normal and |Z| >= y / sqrt(len).
double kill_time(double y, double len, const rng::Block& blk) {
  if (y <= 0.0) return 0.0;
  const double tail = std::erfc(y / std::sqrt(2.0 * len));
  if (!(tail > 0.0)) return len;
  const double u = 1.0 - rng::to_uniform(blk[0], blk[1]);
  const double z = std::sqrt(2.0) * boost::math::erfc_inv(u * tail);
  return std::min(len, y * y / (z * z));
}

class Engine {
 public:
  Engine(const ProcessConfig& cfg, const PathIntegrands& integrands, const SampleOptions& options)
      : cfg_(cfg), integrands_(integrands), options_(options) {
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(cfg.chain.size());
    if (integrands.stochastic_count() > kMaxWidth || integrands.time_count() > kMaxWidth)
      throw std::invalid_argument("sample_paths: at most 8 integrands of each kind");
    if (options.start_state && (*options.start_state < 0 || *options.start_state >= n))
      throw std::invalid_argument("sample_paths: start state out of range");
    for (std::size_t c = 0; c < options.checkpoints.size(); ++c) {
      const double t = options.checkpoints[c];
      if (!(t > 0.0) || (c > 0 && !(t > options.checkpoints[c - 1])))
        throw std::invalid_argument("sample_paths: checkpoints must be positive and increasing");
    }
    checkpoint_mode_ = !options.checkpoints.empty();
    ceiling_ = integrands.ceiling();
    growth_ = integrands.growth_height();
    rate_.resize(static_cast<std::size_t>(n));
    jump_cdf_.resize(static_cast<std::size_t>(n));
    for (Eigen::Index x = 0; x < n; ++x) {
      double total = 0.0;
      auto& cdf = jump_cdf_[static_cast<std::size_t>(x)];
      for (Eigen::Index z = 0; z < n; ++z) {
        if (z != x) total += cfg.kappa * cfg.chain.generator(x, z);
        cdf.push_back(total);
      }
      rate_[static_cast<std::size_t>(x)] = total;
      max_rate_ = std::max(max_rate_, total);
    }
    double acc = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) start_cdf_.push_back(acc += cfg.chain.weights(x));
  }

  void simulate(std::uint64_t p, PathBundle& out) const;

 private:
  struct Jumps {
    std::size_t x;
    double next;
    std::uint64_t count = 0;
  };

  double holding(std::size_t x, rng::PathStream& xs) const {
    return rate_[x] > 0.0 ? xs.exponential(rate_[x]) : kInf;
  }

  // X over [from, to]: exact jumps, or one draw from the transition row
  // when many jumps would be needed.
  void advance(Jumps& j, double from, double to, rng::PathStream& xs) const {
    if (j.next > to) return;
    if (max_rate_ * (to - from) > 32.0) {
      j.x = transition_sample(j.x, to - from, xs);
      j.next = to + holding(j.x, xs);
      ++j.count;
      return;
    }
    while (j.next <= to) jump_once(j, xs);
  }

  void jump_once(Jumps& j, rng::PathStream& xs) const {
    j.x = sample_cumulative(jump_cdf_[j.x], xs.uniform());
    j.next += holding(j.x, xs);
    ++j.count;
  }

  std::size_t transition_sample(std::size_t x, double delta, rng::PathStream& xs) const {
    const auto& dec = cfg_.dec;
    const auto n = dec.vectors.rows();
    std::vector<double> cdf(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (Eigen::Index z = 0; z < n; ++z) {
      double pz = 0.0;
      for (Eigen::Index i = 0; i < dec.lambdas.size(); ++i)
        pz += std::exp(-cfg_.kappa * dec.lambdas(i) * delta) * dec.vectors(static_cast<Eigen::Index>(x), i) *
              dec.vectors(z, i);
      acc += std::max(0.0, pz * dec.weights(z));
      cdf[static_cast<std::size_t>(z)] = acc;
    }
    return sample_cumulative(cdf, xs.uniform());
  }

  const ProcessConfig& cfg_;
  const PathIntegrands& integrands_;
  const SampleOptions& options_;
  bool checkpoint_mode_ = false;
  double ceiling_ = 0.0;
  double growth_ = 1.0;
  double max_rate_ = 0.0;
  std::vector<double> rate_;
  std::vector<std::vector<double>> jump_cdf_;
  std::vector<double> start_cdf_;
};

void Engine::simulate(std::uint64_t p, PathBundle& out) const {
  const std::size_t ns = out.stochastic_width, nt = out.time_width, nc = out.checkpoint_width;
  rng::PathStream xs(cfg_.seed, p, kJumpStream);
  const rng::Key key = rng::seed_key(cfg_.seed);

  Jumps j{0, 0.0, 0};
  j.x = options_.start_state ? static_cast<std::size_t>(*options_.start_state)
                             : sample_cumulative(start_cdf_, xs.uniform());
  j.next = holding(j.x, xs);
  out.x0[p] = static_cast<int>(j.x);

  std::array<StochasticValue, kMaxWidth> a{}, a2{};
  std::array<double, kMaxWidth> b{}, b2{}, si{}, ti{};
  double t = 0.0, y = cfg_.s;
  bool fresh = false;
  std::uint64_t k = 0;
  std::size_t c = 0;
  std::uint32_t steps = 0;
  bool killed = false, censored = false;

  const auto record_rest = [&](double yc) {
    for (; c < nc; ++c) {
      out.checkpoint_x[p * nc + c] = static_cast<int>(j.x);
      out.checkpoint_y[p * nc + c] = yc;
    }
  };

  while (true) {
    if (t > cfg_.horizon) {
      censored = true;
      break;
    }
    if (!checkpoint_mode_ && y > ceiling_) {
      // first hitting time of the ceiling
      const auto blk = rng::draw_block(key, p, 2 * k++);
      const double u1 = 1.0 - rng::to_uniform(blk[0], blk[1]);
      const double u2 = rng::to_uniform(blk[2], blk[3]);
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
      const double hit = (y - ceiling_) * (y - ceiling_) / (z * z);
      if (!(t + hit <= cfg_.horizon)) {
        censored = true;
        break;
      }
      advance(j, t, t + hit, xs);
      t += hit;
      y = ceiling_;
      if (y <= 0.0) {
        killed = true;
        break;
      }
      fresh = false;
      continue;
    }
    if (!fresh) {
      integrands_.evaluate(static_cast<Eigen::Index>(j.x), y, a.data(), b.data());
      fresh = true;
    }
    double delta = cfg_.dt * std::max(1.0, (y / growth_) * (y / growth_));
    delta = std::min(delta, 1e-4 * cfg_.dt + t);
    if (checkpoint_mode_) delta = std::min(delta, options_.checkpoints[c] - t);

    const auto blk = rng::draw_block(key, p, 2 * k);
    const double r = std::sqrt(-2.0 * std::log(1.0 - rng::to_uniform(blk[0], blk[1])));
    const double theta = kTwoPi * rng::to_uniform(blk[2], blk[3]);
    const double y_end = y + std::sqrt(delta) * r * std::cos(theta);
    std::array<double, 3> ys{y, y_end, 0.0};
    int subs = 1;
    if (cfg_.refinement == 1) {
      ys = {y, 0.5 * (y + y_end) + 0.5 * std::sqrt(delta) * r * std::sin(theta), y_end};
      subs = 2;
    }
    const double len = delta / subs;
    // with few jumps per step, pieces end at the jump times of X so that
    // the left-point values never straddle a change of state
    const bool split = max_rate_ * len <= 32.0;
    std::optional<rng::Block> kill_blk;
    for (int q = 0; q < subs && !killed; ++q) {
      const double t_end = t + len, y_end = ys[q + 1];
      while (true) {
        const bool jump = split && j.next < t_end;
        const double tm = jump ? j.next : t_end;
        double ym = y_end;
        std::optional<rng::Block> bridge;
        if (jump) {
          bridge = rng::draw_block(key, p, kBridgeStream + 2 * j.count);
          const double r = std::sqrt(-2.0 * std::log(1.0 - rng::to_uniform((*bridge)[0], (*bridge)[1])));
          const double z = r * std::cos(kTwoPi * rng::to_uniform((*bridge)[2], (*bridge)[3]));
          ym = y + (tm - t) / (t_end - t) * (y_end - y) + std::sqrt((tm - t) * (t_end - tm) / (t_end - t)) * z;
        }
        double frac = -1.0;
        if (ym <= 0.0) {
          frac = y / (y - ym);
        } else {
          const double e = 2.0 * y * ym / (tm - t);
          if (e < 40.0) {
            double u;
            if (jump) {
              const auto blk2 = rng::draw_block(key, p, kBridgeStream + 2 * j.count + 1);
              u = rng::to_uniform(blk2[0], blk2[1]);
            } else {
              if (!kill_blk) kill_blk = rng::draw_block(key, p, 2 * k + 1);
              u = rng::to_uniform((*kill_blk)[2 * q], (*kill_blk)[2 * q + 1]);
            }
            if (u < std::exp(-e)) frac = y / (y + ym);
          }
        }
        if (frac >= 0.0) {
          const double hit = kill_time(y, tm - t, rng::draw_block(key, p, kKillStream));
          const double tk = t + hit;
          if (!split) advance(j, t, tk, xs);
          integrands_.evaluate(static_cast<Eigen::Index>(j.x), 0.0, a2.data(), b2.data());
          for (std::size_t i = 0; i < ns; ++i) {
            const double right = std::isfinite(a2[i].dy) ? a2[i].dy : a[i].dy;
            si[i] -= a[i].primitive + 0.25 * (a[i].dy + right) * hit;
          }
          for (std::size_t i = 0; i < nt; ++i) ti[i] += 0.5 * (b[i] + b2[i]) * hit;
          t = tk;
          y = 0.0;
          killed = true;
          break;
        }
        if (!split) advance(j, t, tm, xs);
        integrands_.evaluate(static_cast<Eigen::Index>(j.x), ym, a2.data(), b2.data());
        for (std::size_t i = 0; i < ns; ++i)
          si[i] += a2[i].primitive - a[i].primitive - 0.25 * (a[i].dy + a2[i].dy) * (tm - t);
        for (std::size_t i = 0; i < nt; ++i) ti[i] += 0.5 * (b[i] + b2[i]) * (tm - t);
        std::swap(a, a2);
        std::swap(b, b2);
        t = tm;
        y = ym;
        if (!jump) break;
        jump_once(j, xs);
        integrands_.evaluate(static_cast<Eigen::Index>(j.x), y, a.data(), b.data());
      }
      if (!killed) ++steps;
    }
    ++k;
    if (killed) break;
    if (checkpoint_mode_ && t >= options_.checkpoints[c] * (1.0 - 1e-12)) {
      t = options_.checkpoints[c];
      out.checkpoint_x[p * nc + c] = static_cast<int>(j.x);
      out.checkpoint_y[p * nc + c] = y;
      if (++c == nc) break;
    }
  }

  if (killed) record_rest(0.0);
  out.censored[p] = censored ? 1 : 0;
  out.x_tau[p] = censored ? -1 : static_cast<int>(j.x);
  out.tau[p] = censored ? cfg_.horizon : t;
  out.steps[p] = steps;
  for (std::size_t i = 0; i < ns; ++i) out.stochastic[p * ns + i] = si[i];
  for (std::size_t i = 0; i < nt; ++i) out.time[p * nt + i] = ti[i];
}

PathBundle allocate(std::size_t count, const PathIntegrands& integrands, const SampleOptions& options) {
  PathBundle out;
  out.count = count;
  out.stochastic_width = integrands.stochastic_count();
  out.time_width = integrands.time_count();
  out.checkpoint_width = options.checkpoints.size();
  out.x0.assign(count, 0);
  out.x_tau.assign(count, 0);
  out.tau.assign(count, 0.0);
  out.censored.assign(count, 0);
  out.steps.assign(count, 0);
  out.stochastic.assign(count * out.stochastic_width, 0.0);
  out.time.assign(count * out.time_width, 0.0);
  out.checkpoint_x.assign(count * out.checkpoint_width, 0);
  out.checkpoint_y.assign(count * out.checkpoint_width, 0.0);
  return out;
}

}  // namespace

PathBundle sample_paths(const ProcessConfig& cfg, std::size_t count, const PathIntegrands& integrands,
                        const SampleOptions& options) {
  const Engine engine(cfg, integrands, options);
  PathBundle out = allocate(count, integrands, options);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t p = 0; p < n; ++p) engine.simulate(static_cast<std::uint64_t>(p), out);
  return out;
}

namespace reference {

PathBundle sample_paths(const ProcessConfig& cfg, std::size_t count, const PathIntegrands& integrands,
                        const SampleOptions& options) {
  const Engine engine(cfg, integrands, options);
  PathBundle out = allocate(count, integrands, options);
  for (std::size_t p = 0; p < count; ++p) engine.simulate(p, out);
  return out;
}

}  // namespace reference

double green_quadrature(const spectral::ChainModel& chain, const GreenIntegrand& F, double s) {
  if (!std::isfinite(F.ceiling)) throw std::invalid_argument("green_quadrature: F needs a finite ceiling");
  std::vector<double> cuts{0.0, F.ceiling};
  for (double b : F.breakpoints)
    if (b > 0.0 && b < F.ceiling) cuts.push_back(b);
  if (s < F.ceiling) cuts.push_back(s);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (Eigen::Index x = 0; x < chain.weights.size(); ++x) {
    const auto g = [&](double y) { return std::min(y, s) * F.F(x, y); };
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, cuts[i], cuts[i + 1], 15, 1e-12);
    total += 2.0 * chain.weights(x) * sum;
  }
  return total;
}

namespace {

// Welford over uncensored paths, in path order.
template <class Sample>
stats::MCEstimate over_paths(const PathBundle& bundle, Sample&& sample) {
  stats::Accumulator acc;
  for (std::size_t p = 0; p < bundle.count; ++p)
    if (!bundle.censored[p]) acc.add(sample(p));
  return acc.estimate();
}

double censored_fraction(const PathBundle& bundle) {
  return bundle.count ? static_cast<double>(bundle.censored_count()) / static_cast<double>(bundle.count) : 0.0;
}

void censoring_guard(CheckReport& r, const PathBundle& bundle) {
  r.details["censored"] = bundle.censored_count();
  if (censored_fraction(bundle) > 0.01) {
    r.status = Status::inconclusive;
    r.note = "more than 1% of paths reached the horizon";
  }
}

nlohmann::ordered_json estimate_json(const stats::MCEstimate& e) {
  return {{"mean", e.mean}, {"standard_error", e.standard_error}, {"count", e.count}};
}

double u_value(const spectral::SpectralDecomposition& dec, const Vector& coeffs, Eigen::Index x, double y) {
  double u = 0.0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    u += coeffs(i) * std::exp(-std::sqrt(dec.lambdas(i)) * y) * dec.vectors(x, i);
  return u;
}

}  // namespace

CheckReport exit_identity_check(const ProcessConfig& cfg, const StateFunction& h, std::size_t count) {
  const ExitOnly none;
  const PathBundle bundle = sample_paths(cfg, count, none);
  const double mass = cfg.chain.total_mass();
  const auto est = over_paths(bundle, [&](std::size_t p) { return mass * h(bundle.x_tau[p]); });
  CheckReport r;
  r.name = "exit-identity";
  r.anchor = "sum(m) E[h(X_tau)] = sum_x h(x) m_x";
  r.value = est.mean;
  r.oracle = cfg.chain.weights.dot(h);
  r.standard_error = est.standard_error;
  r.tolerance = 3.0;
  r.comparison = Comparison::within_se;
  r.decide();
  r.details["paths"] = count;
  censoring_guard(r, bundle);
  return r;
}

CheckReport green_formula_check(const ProcessConfig& cfg, const GreenIntegrand& F, std::size_t count,
                                double relative_tolerance) {
  const FunctionIntegrands integrands({F});
  const PathBundle bundle = sample_paths(cfg, count, integrands);
  const double mass = cfg.chain.total_mass();
  const auto est = over_paths(bundle, [&](std::size_t p) { return mass * bundle.time[p]; });
  CheckReport r;
  r.name = "green-formula";
  r.anchor = "sum(m) E[int_0^tau F(Z_t) dt] = 2 sum_x m_x int_0^inf (y ^ s) F(x,y) dy";
  r.value = est.mean;
  r.oracle = green_quadrature(cfg.chain, F, cfg.s);
  r.standard_error = est.standard_error;
  r.tolerance = 3.0;
  r.comparison = Comparison::within_se;
  r.decide();
  const double rel = std::abs(r.value - r.oracle) / std::abs(r.oracle);
  r.details["F"] = F.label;
  r.details["s"] = cfg.s;
  r.details["dt"] = cfg.dt;
  r.details["paths"] = count;
  r.details["relative_error"] = rel;
  r.details["relative_tolerance"] = relative_tolerance;
  if (r.passed() && relative_tolerance > 0.0 && !(rel < relative_tolerance)) {
    r.status = Status::fail;
    r.note = "within 3 SE but relative error above tolerance";
  }
  censoring_guard(r, bundle);
  return r;
}

PairingMC pairing_mc(const ProcessConfig& cfg, const StateFunction& f, const StateFunction& h, double alpha,
                     std::size_t count) {
  const HarmonicIntegrands integrands(cfg.dec, f, h, alpha, cfg.truncation);
  const PathBundle bundle = sample_paths(cfg, count, integrands);
  const double mass = cfg.chain.total_mass();
  PairingMC out;
  out.count = count;
  out.censored = bundle.censored_count();
  out.s = cfg.s;
  out.dt = cfg.dt;
  out.truncation = cfg.truncation;
  out.alpha = alpha;
  out.terminal = over_paths(
      bundle, [&](std::size_t p) { return mass * h(bundle.x_tau[p]) * bundle.stochastic[p]; });
  out.occupation = over_paths(bundle, [&](std::size_t p) { return mass * bundle.time[2 * p]; });
  out.difference_se =
      over_paths(bundle, [&](std::size_t p) {
        return mass * (h(bundle.x_tau[p]) * bundle.stochastic[p] - bundle.time[2 * p]);
      }).standard_error;
  const auto ito =
      over_paths(bundle, [&](std::size_t p) { return mass * bundle.stochastic[p] * bundle.stochastic[p]; });
  out.ito_second_moment = ito.mean;
  out.ito_second_moment_se = ito.standard_error;
  out.centering = over_paths(bundle, [&](std::size_t p) { return bundle.stochastic[p]; });

  std::vector<stats::Accumulator> bins(cfg.chain.size());
  for (std::size_t p = 0; p < bundle.count; ++p)
    if (!bundle.censored[p]) bins[static_cast<std::size_t>(bundle.x_tau[p])].add(bundle.stochastic[p]);
  for (const auto& b : bins) {
    out.transform.bins.push_back(b.estimate());
    out.transform.low_confidence.push_back(b.count() < 100);
  }

  const functionals::HalfSpaceField hs_f(cfg.dec, f, {1});
  const functionals::HalfSpaceField hs_h(cfg.dec, h, {1});
  out.quadrature = functionals::pairing_quadrature(hs_f, hs_h, alpha, {cfg.s, cfg.truncation, false});
  // (y^alpha ^ N)^2 = y^{2 alpha} ^ N^2
  out.ito_quadrature =
      functionals::pairing_quadrature(hs_f, hs_f, 2.0 * alpha, {cfg.s, cfg.truncation * cfg.truncation, false});
  return out;
}

namespace {

void describe_run(CheckReport& r, const PairingMC& mc) {
  r.details["s"] = mc.s;
  r.details["truncation"] = mc.truncation;
  r.details["dt"] = mc.dt;
  r.details["alpha"] = mc.alpha;
  r.details["paths"] = mc.count;
  r.details["censored"] = mc.censored;
  if (static_cast<double>(mc.censored) > 0.01 * static_cast<double>(mc.count)) {
    r.status = Status::inconclusive;
    r.note = "more than 1% of paths reached the horizon";
  }
}

}  // namespace

TransformEstimate martingale_transform(const ProcessConfig& cfg, const StateFunction& f, double alpha,
                                       std::size_t count) {
  return pairing_mc(cfg, f, f, alpha, count).transform;
}

CheckReport pairing_report(const PairingMC& mc) {
  CheckReport r;
  r.name = "pairing-mc";
  r.anchor = "sum(m) E[h(X_tau) int A dY] = sum(m) E[int B dt] = 2 sum_x m_x int (y ^ s)(y^alpha ^ N) du_f du_h dy";
  r.value = mc.terminal.mean;
  r.oracle = mc.quadrature;
  r.standard_error = mc.terminal.standard_error;
  r.tolerance = 3.0;
  r.comparison = Comparison::within_se;
  r.decide();
  const bool b_ok = std::abs(mc.occupation.mean - mc.quadrature) <=
                    3.0 * mc.occupation.standard_error + 1e-12 * std::max(1.0, std::abs(mc.quadrature));
  const bool ab_ok = std::abs(mc.terminal.mean - mc.occupation.mean) <=
                     3.0 * mc.difference_se + 1e-12 * std::max(1.0, std::abs(mc.quadrature));
  if (r.passed() && !(b_ok && ab_ok)) {
    r.status = Status::fail;
    r.note = !b_ok ? "occupation estimate off the quadrature" : "terminal and occupation estimates disagree";
  }
  r.details["terminal"] = estimate_json(mc.terminal);
  r.details["occupation"] = estimate_json(mc.occupation);
  r.details["difference_se"] = mc.difference_se;
  r.details["quadrature"] = mc.quadrature;
  describe_run(r, mc);
  return r;
}

CheckReport ito_report(const PairingMC& mc) {
  CheckReport r;
  r.name = "ito-isometry";
  r.anchor = "sum(m) E[(int A dY)^2] = 2 sum_x m_x int (y ^ s) A^2 dy";
  r.value = mc.ito_second_moment;
  r.oracle = mc.ito_quadrature;
  r.standard_error = mc.ito_second_moment_se;
  r.tolerance = 3.0;
  r.comparison = Comparison::within_se;
  r.decide();
  describe_run(r, mc);
  return r;
}

CheckReport centering_report(const PairingMC& mc) {
  CheckReport r;
  r.name = "martingale-transform-centering";
  r.anchor = "E[int_0^tau A dY] = 0";
  r.value = mc.centering.mean;
  r.oracle = 0.0;
  r.standard_error = mc.centering.standard_error;
  r.tolerance = 3.0;
  r.comparison = Comparison::within_se;
  r.decide();
  auto bins = nlohmann::ordered_json::array();
  bool low = false;
  for (std::size_t x = 0; x < mc.transform.bins.size(); ++x) {
    bins.push_back(estimate_json(mc.transform.bins[x]));
    low = low || mc.transform.low_confidence[x];
  }
  r.details["bins"] = bins;
  if (low) r.details["low_confidence_bins"] = true;
  describe_run(r, mc);
  return r;
}

CheckReport martingale_symmetry_check(const ProcessConfig& cfg, const StateFunction& f, double alpha,
                                      std::size_t count) {
  return centering_report(pairing_mc(cfg, f, f, alpha, count));
}

CheckReport pairing_mc_check(const ProcessConfig& cfg, const StateFunction& f, const StateFunction& h,
                             double alpha, std::size_t count) {
  return pairing_report(pairing_mc(cfg, f, h, alpha, count));
}

CheckReport ito_isometry_check(const ProcessConfig& cfg, const StateFunction& f, double alpha,
                               std::size_t count) {
  return ito_report(pairing_mc(cfg, f, f, alpha, count));
}

CheckReport clock_calibration(const ProcessConfig& cfg, const StateFunction& f, std::size_t count,
                              const ClockOptions& options) {
  CheckReport r;
  r.name = "clock-calibration";
  r.anchor = "u_f(Z_t) is a martingale iff X runs at rate 1/2";
  r.oracle = 0.5;
  r.comparison = Comparison::informational;
  if (spectral::null_component_ratio(cfg.dec, f) > 1.0 - 1e-12) {
    r.status = Status::skipped;
    r.note = "f is constant; every rate gives zero drift";
    return r;
  }
  const Vector coeffs = spectral::coefficients(cfg.dec, f);
  const double u0 = u_value(cfg.dec, coeffs, options.start_state, options.s);
  SampleOptions sample;
  sample.checkpoints = options.checkpoints;
  sample.start_state = options.start_state;
  const ExitOnly none;
  std::vector<double> selected;
  auto rows = nlohmann::ordered_json::array();
  for (double kappa : options.kappas) {
    ProcessConfig run = cfg;
    run.kappa = kappa;
    run.s = options.s;
    const PathBundle bundle = sample_paths(run, count, none, sample);
    bool consistent = true;
    auto drifts = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < sample.checkpoints.size(); ++c) {
      const std::size_t w = bundle.checkpoint_width;
      const auto est = over_paths(bundle, [&](std::size_t p) {
        return u_value(cfg.dec, coeffs, bundle.checkpoint_x[p * w + c], bundle.checkpoint_y[p * w + c]) - u0;
      });
      consistent = consistent && std::abs(est.mean) <= 3.0 * est.standard_error;
      drifts.push_back({{"t", sample.checkpoints[c]}, {"drift", est.mean}, {"standard_error", est.standard_error}});
    }
    if (consistent) selected.push_back(kappa);
    rows.push_back({{"kappa", kappa}, {"zero_drift", consistent}, {"drifts", drifts}});
  }
  r.details["start_state"] = options.start_state;
  r.details["s"] = options.s;
  r.details["paths"] = count;
  r.details["rates"] = rows;
  if (selected.size() == 1) {
    r.value = selected.front();
    r.status = selected.front() == 0.5 ? Status::pass : Status::fail;
  } else {
    r.value = std::nan("");
    r.status = selected.empty() ? Status::fail : Status::inconclusive;
    r.note = selected.empty() ? "no rate gives zero drift" : "more than one rate gives zero drift";
  }
  return r;
}

CheckReport limit_constant_estimate(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                                    const StateFunction& h, double alpha, const std::vector<double>& s_values) {
  const double target = spectral::inner(dec.weights, spectral::fractional_integral_spectral(dec, alpha, f), h);
  const functionals::HalfSpaceField hs_f(dec, f, {1});
  const functionals::HalfSpaceField hs_h(dec, h, {1});
  std::vector<double> ratios;
  auto rows = nlohmann::ordered_json::array();
  for (double s : s_values) {
    const double q = functionals::pairing_quadrature(hs_f, hs_h, alpha, {s, kInf, false});
    ratios.push_back(q / target);
    rows.push_back({{"s", s}, {"ratio", q / target}, {"closed_form", functionals::pairing_spectral(dec, f, h, alpha, s) / target}});
  }
  const double limit = functionals::pairing_quadrature(hs_f, hs_h, alpha, {kInf, kInf, false}) / target;
  rows.push_back({{"s", "inf"}, {"ratio", limit}});
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) monotone = monotone && ratios[i] >= ratios[i - 1] - 1e-12;
  monotone = monotone && (ratios.empty() || limit >= ratios.back() - 1e-12);

  const double g = boost::math::tgamma(alpha + 2.0);
  const double c_wide = g / std::pow(2.0, alpha + 2.0);
  const double c_narrow = g / std::pow(2.0, alpha + 1.0);
  const auto close = [&](double c) { return std::abs(limit - c) <= 0.005 * c; };

  CheckReport r;
  r.name = "limit-constant";
  r.anchor = "lim_s ratio(s) against Gamma(alpha+2)/2^{alpha+2} and Gamma(alpha+2)/2^{alpha+1}";
  r.value = limit;
  r.tolerance = 0.005;
  r.comparison = Comparison::relative;
  r.oracle = close(c_wide) ? c_wide : c_narrow;
  r.decide();
  if (r.passed() && !monotone) {
    r.status = Status::fail;
    r.note = "ratio not monotone in s";
  }
  r.details["alpha"] = alpha;
  r.details["ratios"] = rows;
  r.details["monotone"] = monotone;
  r.details["gamma_over_2^(alpha+2)"] = c_wide;
  r.details["gamma_over_2^(alpha+1)"] = c_narrow;
  r.details["selected"] = close(c_wide) ? "2^(alpha+2)" : close(c_narrow) ? "2^(alpha+1)" : "none";
  return r;
}

CheckReport dt_halving_check(const ProcessConfig& cfg, const StateFunction& f, double alpha,
                             std::size_t count) {
  ProcessConfig fine = cfg;
  fine.refinement = cfg.refinement + 1;
  const PairingMC coarse_pair = pairing_mc(cfg, f, f, alpha, count);
  const PairingMC fine_pair = pairing_mc(fine, f, f, alpha, count);

  const FunctionIntegrands green({power_exponential(alpha)});
  const double mass = cfg.chain.total_mass();
  const auto green_mean = [&](const ProcessConfig& c) {
    const PathBundle b = sample_paths(c, count, green);
    return over_paths(b, [&](std::size_t p) { return mass * b.time[p]; });
  };
  const auto coarse_green = green_mean(cfg);
  const auto fine_green = green_mean(fine);

  struct Row {
    const char* label;
    stats::MCEstimate coarse, fine;
  };
  const std::array<Row, 4> rows{{{"pairing-terminal", coarse_pair.terminal, fine_pair.terminal},
                                 {"pairing-occupation", coarse_pair.occupation, fine_pair.occupation},
                                 {"ito-second-moment",
                                  {coarse_pair.ito_second_moment, coarse_pair.ito_second_moment_se, count},
                                  {fine_pair.ito_second_moment, fine_pair.ito_second_moment_se, count}},
                                 {"green-power-exponential", coarse_green, fine_green}}};
  double worst = 0.0;
  auto table = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    const double shift = std::abs(row.fine.mean - row.coarse.mean);
    const double se = std::max(row.coarse.standard_error, row.fine.standard_error);
    const double z = se > 0.0 ? shift / se : (shift > 0.0 ? kInf : 0.0);
    worst = std::max(worst, z);
    table.push_back({{"quantity", row.label}, {"dt", row.coarse.mean}, {"dt/2", row.fine.mean},
                     {"standard_error", se}, {"shift_in_se", z}});
  }
  CheckReport r;
  r.name = "dt-halving";
  r.anchor = "MC means stable under dt -> dt/2";
  r.value = worst;
  r.oracle = 1.0;
  r.tolerance = 0.0;
  r.comparison = Comparison::upper_bound;
  r.decide();
  r.details["dt"] = cfg.dt;
  r.details["paths"] = count;
  r.details["means"] = table;
  r.note = "dt/2 refines the same Brownian paths";
  return r;
}

CheckReport terminal_distribution_check(const ProcessConfig& cfg, std::size_t count) {
  const ExitOnly none;
  const PathBundle bundle = sample_paths(cfg, count, none);
  std::vector<double> observed(cfg.chain.size(), 0.0);
  for (std::size_t p = 0; p < bundle.count; ++p)
    if (!bundle.censored[p]) observed[static_cast<std::size_t>(bundle.x_tau[p])] += 1.0;
  std::vector<double> prob(cfg.chain.size());
  for (std::size_t x = 0; x < prob.size(); ++x)
    prob[x] = cfg.chain.weights(static_cast<Eigen::Index>(x)) / cfg.chain.total_mass();
  CheckReport r;
  r.name = "terminal-distribution";
  r.anchor = "X_tau ~ m / sum(m)";
  r.value = stats::chi_square_p_value(observed, prob);
  r.oracle = 0.01;
  r.comparison = Comparison::informational;
  r.status = r.value > 0.01 ? Status::pass : Status::fail;
  r.details["observed"] = observed;
  r.details["expected"] = prob;
  r.details["paths"] = count;
  censoring_guard(r, bundle);
  return r;
}

}  // namespace shls::process
