#pragma once

// Heat semigroup on a tensor grid in R^d (generator Laplacian, variance 2t
// per axis), Riesz potentials, and the scaling experiments built on them.
//
// Grid data are treated as samples of a band-limited function, so the heat
// kernel is the band-limited one:
//   (T_t f)(x) = sum_j K_t((x - x_j)/h) f_j,
//   K_t(r) = int_0^1 exp(-t (pi/h)^2 v^2) cos(pi r v) dv.
// This conserves sum_j f_j exactly and satisfies T_t T_s = T_{t+s} on the
// infinite lattice.

#include "shls/grid.hpp"
#include "shls/report.hpp"

#include <functional>
#include <vector>

namespace shls::continuum {

using Profile = std::function<double(const Point&)>;

/// exp(-|x|^2 / (2 sigma^2))
Profile gaussian_profile(double sigma);

double heat_kernel_value(double t, double h, double offset);
/// K_t(m) for m = 0..n-1.
std::vector<double> heat_kernel_1d(const GridSpec& spec, double t);

/// Separable convolution, parallel over grid lines. Attaches a warning when
/// the input is not negligible on the boundary.
GridField heat_apply(const GridField& field, double t);
/// (T_t f)(x) at one point in O(n^d).
double heat_apply_at(const GridField& field, double t, const Point& x);

/// Gamma((d-alpha)/2) / (2^alpha pi^{d/2} Gamma(alpha/2))
double riesz_constant(int d, double alpha);

/// c(d,alpha) int f(y) |x-y|^{alpha-d} dy at grid nodes. The kernel
/// singularity is removed by subtracting f(x) exp(-|x-y|^2/2) (whose integral
/// is closed form); the remainder is a punctured lattice sum, Richardson
/// extrapolated between spacings h and 2h. Nodes within one cell of the
/// boundary are rejected.
std::vector<double> riesz_apply(const GridField& field, double alpha, const std::vector<Index>& nodes);

namespace reference {
GridField heat_apply(const GridField& field, double t);
std::vector<double> riesz_apply(const GridField& field, double alpha, const std::vector<Index>& nodes);
}  // namespace reference

/// T_s f sampled on s = e^u for u on a uniform lattice covering
/// [1e-8 h^2, 1e6 extent^2], either on the whole grid or at chosen points.
/// Outside that range the lattice is continued in closed form: T_s f = f
/// below, and T_s f = M (4 pi s)^{-d/2} (M the mass of f) above.
class HeatHistory {
 public:
  static HeatHistory full(const GridField& f, double log_step = 0.25);
  static HeatHistory at_points(const GridField& f, const std::vector<Point>& points,
                               double log_step = 0.25);

  std::size_t locations() const { return initial_.size(); }
  const std::vector<double>& times() const { return times_; }
  double mass() const { return mass_; }

  /// (1/Gamma(alpha/2)) int_0^inf s^{alpha/2-1} T_s f ds; needs alpha < d.
  std::vector<double> fractional_integral(double alpha) const;
  /// int_0^inf T_s f eta_y(s) ds
  std::vector<double> poisson(double y) const;
  /// d/dy of poisson(y)
  std::vector<double> poisson_dy(double y) const;
  /// (int_0^inf y^{2 alpha + 1} |d/dy P_y f|^2 dy)^{1/2}
  std::vector<double> frac_g_function(double alpha) const;

 private:
  HeatHistory() = default;
  template <class Kernel>
  std::vector<double> subordinate(double y, Kernel kernel) const;

  int d_ = 3;
  double h_ = 0.0;
  double extent_ = 0.0;
  double mass_ = 0.0;
  double log_step_ = 0.25;
  std::vector<double> times_;
  std::vector<double> initial_;
  std::vector<std::vector<double>> values_;
};

struct Window {
  double lo;
  double hi;
};

/// Slope of t -> ||T_t f_t||_inf / ||f_t||_p over the window for the dilation
/// family f_t(x) = g(x sqrt(t_lo / t)). The extremal family for the bound
/// ||T_t f||_inf <= c t^{-d/2p} ||f||_p; passes iff the slope is -d/(2p)
/// within 5% and R^2 >= 0.99 (else inconclusive).
CheckReport varopoulos_slope(const GridSpec& spec, const Profile& g, double p, Window window,
                             int samples = 6);

/// Same for y -> P_y f_y(0) / ||f_y||_p with f_y(x) = g(x y_lo / y); target
/// -d/p. The sup of P_y f_y is taken at the origin, so g should be radially
/// decreasing.
CheckReport poisson_dimension_check(const GridSpec& spec, const Profile& g, double p, Window window,
                                    int samples = 6);

/// 1/q = 1/p - alpha/d; throws unless 1 < p < q < inf.
double hls_exponent(int d, double alpha, double p);

/// |<I_alpha f, h>| / (||f||_p ||h||_{q'}) with cell weight h^d.
double hls_ratio(const GridField& f, const GridField& h, double alpha, double p);

struct HlsSetup {
  int d = 3;
  double alpha = 1.0;
  double p = 2.0;
  double extent = 9.0;
  int n_coarse = 24;
  int n_fine = 48;
  std::vector<double> dilations{0.5, 1.0, 2.0};
  // wide enough that the r = 2 member is resolved at n_coarse
  double sigma_f = 1.5;
  double sigma_h = 1.5;
};

/// Gaussian f and h dilated together, f_r(x) = f(r x); value is the larger of
/// the refinement drift and the dilation spread of hls_ratio.
CheckReport hls_ratio_check(const HlsSetup& setup, double tolerance = 0.05);

}  // namespace shls::continuum
