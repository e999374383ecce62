// Acceptance criteria C1-C12. One PASS/FAIL line per criterion.
//   acceptance               all criteria
//   acceptance --criterion k one criterion; exit 1 on FAIL

#include "shls/chain.hpp"
#include "shls/chain_library.hpp"
#include "shls/continuum.hpp"
#include "shls/functionals.hpp"
#include "shls/process.hpp"
#include "shls/subordination.hpp"
#include "shls/suites.hpp"

#include "CLI11.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace shls;

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Chain {
  spectral::ChainModel model;
  spectral::SpectralDecomposition dec;
};

std::vector<Chain> random_chains(int count, std::uint64_t seed) {
  std::vector<Chain> out;
  for (int k = 0; k < count; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>((5 * k + 1) % 15);
    auto model = spectral::random_reversible_chain(n, seed + static_cast<std::uint64_t>(k));
    auto dec = spectral::decompose(model);
    out.push_back({std::move(model), std::move(dec)});
  }
  return out;
}

StateFunction slowest(const spectral::SpectralDecomposition& dec) {
  for (Eigen::Index i = 0; i < dec.lambdas.size(); ++i)
    if (dec.lambdas(i) > spectral::kZeroEigenvalue) return dec.vectors.col(i);
  return dec.vectors.col(0);
}

Outcome c1() {
  double worst = 0.0;
  for (const auto& c : random_chains(20, 1001)) {
    const StateFunction f = spectral::random_function(c.model.size(), 77 + c.model.size());
    for (double y : {0.05, 0.2, 1.0, 3.0, 10.0}) {
      const auto q = subordination::poisson_via_subordination(c.dec, y, f);
      worst = std::max(worst, (q.values - spectral::apply_poisson(c.dec, y, f)).cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-6, fmt("max-norm error %.3e over 20 chains (< 1e-6)", worst)};
}

Outcome c2() {
  double worst = 0.0;
  auto chains = random_chains(10, 2002);
  chains.push_back({spectral::two_state_chain(), spectral::decompose(spectral::two_state_chain())});
  for (const auto& c : chains) {
    const StateFunction f = spectral::random_zero_mean_function(c.model, 5 + c.model.size());
    for (double alpha : {0.5, 1.0, 1.5}) {
      const Vector exact = spectral::fractional_integral_spectral(c.dec, alpha, f);
      const auto q = spectral::fractional_integral_quadrature(c.dec, alpha, f, 1e-12);
      worst = std::max(worst, (q.values - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-7, fmt("max relative error %.3e, alpha in {0.5, 1, 1.5} (< 1e-7)", worst)};
}

Outcome c3() {
  const auto model = spectral::random_reversible_chain(12, 3003);
  const auto dec = spectral::decompose(model);
  const Vector& m = model.weights;
  double g1 = 0.0, G = 0.0;
  for (int k = 0; k < 50; ++k) {
    const StateFunction f = spectral::random_zero_mean_function(model, 300 + k);
    const functionals::HalfSpaceField hs(dec, f, {1});
    g1 = std::max(g1, std::abs(spectral::lp_norm(m, functionals::g_function(hs, 1), 2.0) /
                                   (0.5 * spectral::lp_norm(m, f, 2.0)) - 1.0));
    for (double alpha : {0.5, 1.0, 1.5}) {
      const double If = spectral::lp_norm(m, spectral::fractional_integral_spectral(dec, alpha, f), 2.0);
      const double oracle = std::sqrt(boost::math::tgamma(2.0 * alpha + 2.0)) / std::pow(2.0, alpha + 1.0) * If;
      G = std::max(G, std::abs(spectral::lp_norm(m, functionals::frac_g_function(hs, alpha), 2.0) / oracle - 1.0));
    }
  }
  return {g1 < 1e-6 && G < 1e-6, fmt("g1 rel err %.3e, G_alpha rel err %.3e over 50 functions (< 1e-6)", g1, G)};
}

Outcome c4() {
  const double c1 = 4.0 * std::exp(-1.25);
  std::vector<double> ys;
  for (int k = 0; k <= 50; ++k) ys.push_back(0.001 * std::pow(10.0, k / 10.0));
  double worst = 0.0;
  auto chains = random_chains(20, 4004);
  chains.push_back({spectral::two_state_chain(), spectral::decompose(spectral::two_state_chain())});
  for (const auto& c : chains) {
    for (int j = 0; j < 3; ++j) {
      const StateFunction f = spectral::random_function(c.model.size(), 400 + 10 * c.model.size() + j);
      worst = std::max(worst, subordination::derivative_bound_check(c.dec, f, ys).value);
    }
    worst = std::max(worst, subordination::derivative_bound_check(c.dec, slowest(c.dec), ys).value);
    StateFunction g = spectral::random_function(c.model.size(), 401 + 10 * c.model.size());
    g(0) = 0.0;
    worst = std::max(worst, subordination::derivative_bound_check(c.dec, g, ys).value);
  }
  return {worst <= c1 + 1e-3, fmt("max ratio %.6f vs 4e^{-5/4} = %.6f (+1e-3)", worst, c1)};
}

Outcome c5() {
  double excess = -kInf;
  std::string where;
  auto chains = random_chains(10, 5005);
  chains.push_back({spectral::two_state_chain(), spectral::decompose(spectral::two_state_chain())});
  for (double p : {1.5, 2.0, 3.0})
    for (const auto& c : chains)
      for (int j = 0; j < 4; ++j) {
        const std::uint64_t seed = 500 + 10 * c.model.size() + j;
        const StateFunction f = j % 2 ? spectral::random_nonnegative_function(c.model.size(), seed)
                                      : spectral::random_function(c.model.size(), seed);
        const auto r = functionals::stein_check(functionals::HalfSpaceField(c.dec, f, {0}), p);
        if (r.value - r.oracle > excess) {
          excess = r.value - r.oracle;
          where = fmt("p = %.1f ratio %.6f bound %.6f", p, r.value, r.oracle);
        }
      }
  return {excess <= 1e-9, "worst case " + where + " (+1e-9)"};
}

Outcome c6() {
  const continuum::GridSpec spec{3, 48, 8.0};
  const auto g = continuum::gaussian_profile(1.0);
  const auto f = continuum::GridField::sample(spec, g);
  std::vector<continuum::Index> nodes{{24, 24, 24, 0}, {20, 24, 26, 0}, {28, 22, 24, 0}, {24, 30, 21, 0}, {17, 26, 29, 0}};
  std::vector<continuum::Point> points;
  for (const auto& i : nodes) points.push_back(spec.point(i));
  const auto kernel = continuum::riesz_apply(f, 1.0, nodes);
  const auto semigroup = continuum::HeatHistory::at_points(f, points).fractional_integral(1.0);
  double rel = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) rel = std::max(rel, std::abs(semigroup[k] - kernel[k]) / kernel[k]);

  const continuum::GridSpec odd{3, 49, 8.0};
  const double origin = continuum::HeatHistory::at_points(continuum::GridField::sample(odd, g), {continuum::Point{}})
                            .fractional_integral(1.0)[0];
  const double target = 2.0 / kPi;
  const bool ok = rel < 1e-3 && std::abs(origin - target) <= 1e-3;
  return {ok, fmt("5-node rel err %.3e (< 1e-3); I_1 gaussian at 0 = %.6f vs 2/pi = %.6f (+-1e-3)", rel, origin,
                  target)};
}

Outcome c7() {
  const continuum::GridSpec spec{3, 48, 8.0};
  const auto g = continuum::gaussian_profile(1.0);
  bool ok = true;
  std::ostringstream msg;
  for (double p : {1.0, 2.0}) {
    const auto v = continuum::varopoulos_slope(spec, g, p, {0.25, 1.0});
    const auto q = continuum::poisson_dimension_check(spec, g, p, {0.5, 1.0});
    for (const auto* r : {&v, &q}) {
      const double r2 = r->details["r_squared"].get<double>();
      const bool good = std::abs(r->value - r->oracle) <= 0.05 * std::abs(r->oracle) && r2 >= 0.99;
      ok = ok && good;
      msg << r->name << " p=" << p << " slope " << r->value << " (" << r->oracle << ") R2 " << r2 << "; ";
    }
  }
  return {ok, msg.str()};
}

process::ProcessConfig two_state(double s) {
  auto cfg = process::ProcessConfig::for_chain(spectral::two_state_chain());
  cfg.s = s;
  cfg.dt = 0.01;
  cfg.seed = 8;
  return cfg;
}

Outcome c8() {
  bool ok = true;
  std::ostringstream msg;
  StateFunction h = StateFunction::Zero(2);
  h(0) = 1.0;
  for (double s : {1.0, 5.0}) {
    const auto cfg = two_state(s);
    const auto e = process::exit_identity_check(cfg, h, 100000);
    const auto g1 = process::green_formula_check(cfg, process::indicator_below(1.0), 100000);
    const auto g2 = process::green_formula_check(cfg, process::power_exponential(1.0), 100000);
    for (const auto* r : {&e, &g1, &g2}) {
      const bool good = std::abs(r->value - r->oracle) <= 3.0 * r->standard_error.value_or(0.0) + 1e-12;
      ok = ok && good;
      msg << r->name << " s=" << s << " " << r->value << " vs " << r->oracle << " (" << *r->standard_error << "); ";
    }
  }
  auto cfg = two_state(1.0);
  cfg.seed = 88;
  const auto big = process::green_formula_check(cfg, process::indicator_below(1.0), 1000000);
  const double rel = std::abs(big.value - 2.0) / 2.0;
  ok = ok && rel < 0.01;
  msg << "indicator at 1e6 paths " << big.value << " rel err " << rel << " (< 1%)";
  return {ok, msg.str()};
}

Outcome c9() {
  auto cfg = two_state(5.0);
  cfg.seed = 9;
  cfg.truncation = 1e3;
  StateFunction f = slowest(cfg.dec);
  f /= f.cwiseAbs().maxCoeff();
  const auto mc = process::pairing_mc(cfg, f, f, 1.0, 1000000);
  const double a = mc.terminal.mean, b = mc.occupation.mean, q = mc.quadrature;
  const bool ab = std::abs(a - b) <= 3.0 * mc.difference_se;
  const bool aq = std::abs(a - q) <= 3.0 * mc.terminal.standard_error;
  const bool bq = std::abs(b - q) <= 3.0 * mc.occupation.standard_error;
  const auto clock = process::clock_calibration(two_state(0.5), f, 100000);
  const bool unique = clock.status == Status::pass;
  return {ab && aq && bq && unique,
          fmt("(a) %.5f +- %.5f, (b) %.5f +- %.5f, (c) %.5f, |a-b|/se %.2f; clock selects %s", a,
              mc.terminal.standard_error, b, mc.occupation.standard_error, q, std::abs(a - b) / mc.difference_se,
              unique ? "kappa = 1/2 uniquely" : "not uniquely 1/2")};
}

Outcome c10() {
  const auto model = spectral::two_state_chain();
  const auto dec = spectral::decompose(model);
  const StateFunction f = slowest(dec);
  bool ok = true;
  std::ostringstream msg;
  for (double alpha : {0.5, 1.0}) {
    const auto r = process::limit_constant_estimate(dec, f, f, alpha);
    const bool good = r.status == Status::pass && r.details["monotone"].get<bool>();
    ok = ok && good;
    msg << "alpha " << alpha << ": limit " << r.value << " selects Gamma(alpha+2)/"
        << r.details["selected"].get<std::string>() << " = " << r.oracle << "; ";
  }
  const double pairing = spectral::inner(model.weights, spectral::fractional_integral_spectral(dec, 1.0, f), f);
  msg << "<I_1 f, f> = " << pairing;
  return {ok, msg.str()};
}

Outcome c11() {
  continuum::HlsSetup setup;
  setup.alpha = 1.0;
  setup.p = 2.0;
  const auto r1 = continuum::hls_ratio_check(setup);
  const auto r2 = functionals::hls_gfunction_check(setup);
  return {r1.value < 0.05 && r2.value < 0.05,
          fmt("hls_ratio drift %.4f, G_alpha drift %.4f (< 0.05)", r1.value, r2.value)};
}

Outcome c12() {
  suites::RunConfig cfg;
  cfg.suite = "all";
  cfg.paths = 20000;
  cfg.seed = 12;
  cfg.out = "";
  const int threads = std::max(4, omp_get_num_procs());
  omp_set_num_threads(1);
  const std::string sequential = suites::run(cfg).to_json().dump(2);
  omp_set_num_threads(threads);
  const std::string parallel = suites::run(cfg).to_json().dump(2);
  const std::string again = suites::run(cfg).to_json().dump(2);
  const bool ok = sequential == parallel && parallel == again;
  return {ok, fmt("report.json %zu bytes; 1 thread vs %d threads %s, repeat %s", sequential.size(), threads,
                  sequential == parallel ? "identical" : "DIFFERENT", parallel == again ? "identical" : "DIFFERENT")};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"spectral consistency (subordinated vs spectral Poisson)", c1},
    {"fractional-integral oracle", c2},
    {"exact L2 identities", c3},
    {"derivative bound", c4},
    {"maximal inequality", c5},
    {"Riesz equivalence", c6},
    {"dimension slopes", c7},
    {"Green formula and exit identity", c8},
    {"pairing identity and clock", c9},
    {"limit constant", c10},
    {"HLS stability", c11},
    {"determinism", c12},
};

bool run_one(int k) {
  Outcome o{false, ""};
  try {
    o = kCriteria[static_cast<std::size_t>(k - 1)].second();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("C%d %s  %s: %s\n", k, o.pass ? "PASS" : "FAIL", kCriteria[static_cast<std::size_t>(k - 1)].first.c_str(),
              o.detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "run one criterion (1-12)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);
  if (criterion > 0) return run_one(criterion) ? 0 : 1;
  int failed = 0;
  for (int k = 1; k <= static_cast<int>(kCriteria.size()); ++k) failed += run_one(k) ? 0 : 1;
  return failed == 0 ? 0 : 1;
}
