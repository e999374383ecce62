#pragma once

// Killed space-time process Z_t = (X_t, Y_t): X a continuous-time chain with
// generator kappa L started from m / sum(m), Y a Brownian motion from s
// killed at 0. Path integrals
//   SI_j = int_0^tau A_j(Z_t) dY_t
//   TI_j = int_0^tau B_j(Z_t) dt
// are accumulated along each path. Steps are cut at the jump times of X, so
// X is constant on every piece and, with Phi_j the y-primitive of A_j,
//   int A_j dY = Delta Phi_j - (1/2) int dA_j/dy dt   (Ito's formula).
// Time integrals use the trapezoid rule with 0 at a killed right end.

#include "shls/chain.hpp"
#include "shls/functionals.hpp"
#include "shls/report.hpp"
#include "shls/stats.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace shls::process {

struct ProcessConfig {
  spectral::ChainModel chain;
  spectral::SpectralDecomposition dec;
  double s = 1.0;
  double dt = 0.01;
  double kappa = 0.5;
  double truncation = 1e3;  // N in (Y^alpha ^ N)
  std::uint64_t seed = 1;
  double horizon = 1e15;
  /// 0 or 1. At 1 every step is split at a Brownian-bridge midpoint drawn
  /// from the same counters, so the path is a refinement of the level-0 one.
  int refinement = 0;

  static ProcessConfig for_chain(spectral::ChainModel chain);
  void validate() const;
};

/// A stochastic integrand at one point.
struct StochasticValue {
  double value = 0.0;      // A(x, y)
  double dy = 0.0;         // dA/dy
  double primitive = 0.0;  // int_0^y A(x, eta) d eta
};

class PathIntegrands {
 public:
  virtual ~PathIntegrands() = default;
  virtual std::size_t stochastic_count() const = 0;
  virtual std::size_t time_count() const = 0;
  /// Fills a[0..stochastic_count) and b[0..time_count) at (x, y).
  virtual void evaluate(Eigen::Index x, double y, StochasticValue* a, double* b) const = 0;
  /// Above this height every integrand is negligible; the path is moved
  /// straight to the next hitting time of it. 0 skips stepping entirely.
  virtual double ceiling() const = 0;
  /// Below this height the step is dt; above it grows like (y / height)^2.
  virtual double growth_height() const = 0;
};

/// No integrands: X_tau only.
class ExitOnly final : public PathIntegrands {
 public:
  std::size_t stochastic_count() const override { return 0; }
  std::size_t time_count() const override { return 0; }
  void evaluate(Eigen::Index, double, StochasticValue*, double*) const override {}
  double ceiling() const override { return 0.0; }
  double growth_height() const override { return 1.0; }
};

/// A time integrand F(x, y) with known breakpoints and a finite ceiling.
struct GreenIntegrand {
  std::string label;
  std::function<double(Eigen::Index, double)> F;
  std::vector<double> breakpoints;
  double ceiling = kInf;
};

GreenIntegrand indicator_below(double level);
/// y^alpha e^{-y} on every state.
GreenIntegrand power_exponential(double alpha);

class FunctionIntegrands final : public PathIntegrands {
 public:
  explicit FunctionIntegrands(std::vector<GreenIntegrand> terms);
  std::size_t stochastic_count() const override { return 0; }
  std::size_t time_count() const override { return terms_.size(); }
  void evaluate(Eigen::Index x, double y, StochasticValue* a, double* b) const override;
  double ceiling() const override { return ceiling_; }
  double growth_height() const override { return 1.0; }

 private:
  std::vector<GreenIntegrand> terms_;
  double ceiling_;
};

/// With w(y) = y^alpha ^ N and spectral du/dy:
///   A_0 = w du_f/dy
///   B_0 = w du_f/dy du_h/dy
///   B_1 = w^2 (du_f/dy)^2
class HarmonicIntegrands final : public PathIntegrands {
 public:
  HarmonicIntegrands(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                     const StateFunction& h, double alpha, double truncation);
  std::size_t stochastic_count() const override { return 1; }
  std::size_t time_count() const override { return 2; }
  void evaluate(Eigen::Index x, double y, StochasticValue* a, double* b) const override;
  double ceiling() const override { return ceiling_; }
  double growth_height() const override { return growth_; }

 private:
  Vector roots_;
  Matrix phi_;  // phi_(x, i) = phi_i(x)
  Vector cf_, ch_;
  double alpha_, truncation_;
  double ceiling_, growth_;
  double knee_;  // N^{1/alpha}, where w stops growing
  /// int_0^y w(eta) e^{-r eta} d eta, given decay = e^{-r y}
  double weighted_laplace(double r, double y, double decay) const;
};

struct SampleOptions {
  /// Stop-time mode: record Z at these times (no ceiling jumps), end the
  /// path at the last one.
  std::vector<double> checkpoints;
  std::optional<Eigen::Index> start_state;
};

struct PathBundle {
  std::size_t count = 0;
  std::size_t stochastic_width = 0;
  std::size_t time_width = 0;
  std::size_t checkpoint_width = 0;
  std::vector<int> x0;
  std::vector<int> x_tau;
  std::vector<double> tau;
  std::vector<std::uint8_t> censored;
  std::vector<std::uint32_t> steps;
  std::vector<double> stochastic;  // count x stochastic_width
  std::vector<double> time;        // count x time_width
  std::vector<int> checkpoint_x;   // count x checkpoint_width
  std::vector<double> checkpoint_y;

  std::size_t censored_count() const;
  bool operator==(const PathBundle& other) const = default;
  void write_csv(std::ostream& out) const;
};

/// Paths are independent; OpenMP over paths, each writing its own slot.
PathBundle sample_paths(const ProcessConfig& cfg, std::size_t count, const PathIntegrands& integrands,
                        const SampleOptions& options = {});

namespace reference {
PathBundle sample_paths(const ProcessConfig& cfg, std::size_t count, const PathIntegrands& integrands,
                        const SampleOptions& options = {});
}  // namespace reference

/// 2 sum_x m_x int_0^ceiling (y ^ s) F(x, y) dy by adaptive Gauss-Kronrod.
double green_quadrature(const spectral::ChainModel& chain, const GreenIntegrand& F, double s);

CheckReport exit_identity_check(const ProcessConfig& cfg, const StateFunction& h, std::size_t count);
CheckReport green_formula_check(const ProcessConfig& cfg, const GreenIntegrand& F, std::size_t count,
                                double relative_tolerance = 0.01);

struct TransformEstimate {
  std::vector<stats::MCEstimate> bins;  // one per terminal state
  std::vector<bool> low_confidence;     // fewer than 100 paths
};

TransformEstimate martingale_transform(const ProcessConfig& cfg, const StateFunction& f, double alpha,
                                       std::size_t count);
CheckReport martingale_symmetry_check(const ProcessConfig& cfg, const StateFunction& f, double alpha,
                                      std::size_t count);

struct PairingMC {
  stats::MCEstimate terminal;    // (a) sum(m) h(X_tau) SI
  stats::MCEstimate occupation;  // (b) sum(m) TI
  double difference_se = 0.0;    // SE of (a) - (b), paired
  double quadrature = 0.0;       // (c)
  double ito_second_moment = 0.0;
  double ito_second_moment_se = 0.0;
  double ito_quadrature = 0.0;
  stats::MCEstimate centering;  // E[SI]
  TransformEstimate transform;  // E[SI | X_tau = x]
  std::size_t count = 0;
  std::size_t censored = 0;
  double s = 0.0, dt = 0.0, truncation = 0.0, alpha = 0.0;
};

PairingMC pairing_mc(const ProcessConfig& cfg, const StateFunction& f, const StateFunction& h,
                     double alpha, std::size_t count);
/// Reports built from one pairing run.
CheckReport pairing_report(const PairingMC& mc);
CheckReport ito_report(const PairingMC& mc);
CheckReport centering_report(const PairingMC& mc);

CheckReport pairing_mc_check(const ProcessConfig& cfg, const StateFunction& f, const StateFunction& h,
                             double alpha, std::size_t count);
CheckReport ito_isometry_check(const ProcessConfig& cfg, const StateFunction& f, double alpha,
                               std::size_t count);

struct ClockOptions {
  std::vector<double> kappas{0.25, 0.5, 1.0, 2.0};
  std::vector<double> checkpoints{0.5, 1.0, 2.0};
  double s = 0.5;
  Eigen::Index start_state = 0;
};

CheckReport clock_calibration(const ProcessConfig& cfg, const StateFunction& f, std::size_t count,
                              const ClockOptions& options = {});

CheckReport limit_constant_estimate(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                                    const StateFunction& h, double alpha,
                                    const std::vector<double>& s_values = {1, 2, 5, 10, 20});

/// Reruns the pairing and a Green check at dt / 2 with the same seed.
CheckReport dt_halving_check(const ProcessConfig& cfg, const StateFunction& f, double alpha,
                             std::size_t count);
/// Pearson test of the X_tau counts against m / sum(m).
CheckReport terminal_distribution_check(const ProcessConfig& cfg, std::size_t count);

}  // namespace shls::process
