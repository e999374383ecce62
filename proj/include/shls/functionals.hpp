#pragma once

// Square functions of the harmonic extension u_f(x,y) = P_y f(x) on a
// finite chain, the Hedberg split, and the pairing integral
//   2 sum_x m_x int_0^inf (y ^ s)(y^alpha ^ N) du_f/dy du_h/dy dy.

#include "shls/chain.hpp"
#include "shls/continuum.hpp"
#include "shls/report.hpp"

#include <iosfwd>
#include <map>
#include <vector>

namespace shls::functionals {

/// Log-spaced heights with trapezoid weights du * y.
struct YGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double log_step = 0.0;
};

/// [1e-4 / sqrt(lambda_max), 30 / sqrt(gap)] with `count` nodes.
YGrid make_y_grid(const spectral::SpectralDecomposition& dec, int count = 512);

class HalfSpaceField {
 public:
  /// Stores d^k u_f / dy^k at every node for k in `orders` (0 = u_f itself).
  HalfSpaceField(const spectral::SpectralDecomposition& dec, StateFunction f,
                 std::vector<int> orders = {0, 1}, int count = 512);

  const spectral::SpectralDecomposition& decomposition() const { return *dec_; }
  const StateFunction& base() const { return f_; }
  const YGrid& grid() const { return grid_; }
  bool has(int k) const { return derivatives_.count(k) > 0; }
  /// d^k u / dy^k at node i.
  const Vector& derivative(int k, std::size_t i) const;

 private:
  const spectral::SpectralDecomposition* dec_;
  StateFunction f_;
  YGrid grid_;
  std::map<int, std::vector<Vector>> derivatives_;
};

/// g_k(f)(x) = (int_0^inf y^{2k-1} |d^k u/dy^k|^2 dy)^{1/2}
StateFunction g_function(const HalfSpaceField& hs, int k);
/// G_alpha(f)(x) = (int_0^inf y^{2 alpha + 1} |du/dy|^2 dy)^{1/2}
StateFunction frac_g_function(const HalfSpaceField& hs, double alpha);
/// sup over the grid and y = 0 of |u_f(x, y)|.
StateFunction maximal_function(const HalfSpaceField& hs);

/// ||sup_y |u_f||_p / ||f||_p against p/(p-1) (1 for p = inf).
CheckReport stein_check(const HalfSpaceField& hs, double p);

struct HedbergInput {
  double M;  // sup_y u_{|f|}(x, y)
  double F;  // ||f||_p
  double alpha;
  double p;
  double d;
};

struct HedbergSplit {
  double delta;  // +inf when M = 0, 0 when F = 0
  double bound;  // psi(delta) = M delta^alpha + F delta^{alpha - d/p}
};

HedbergSplit hedberg_split(const HedbergInput& in);

struct PairingOptions {
  double s = kInf;
  double truncation = kInf;  // N in (y^alpha ^ N)
  bool absolute = false;     // |du_f/dy| |du_h/dy|
};

double pairing_quadrature(const HalfSpaceField& hs_f, const HalfSpaceField& hs_h, double alpha,
                          const PairingOptions& opt = {});

/// 2 Gamma(alpha+2) 2^{-(alpha+2)} sum_{lambda>0} lambda^{-alpha/2} f_i h_i
double pairing_spectral(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                        const StateFunction& h, double alpha);

/// Closed form for finite s and N = inf:
/// 2 sum lambda f_i h_i [b^{-(a+2)} gamma(a+2, b s) + s b^{-(a+1)} Gamma(a+1, b s)], b = 2 sqrt(lambda).
double pairing_spectral(const spectral::SpectralDecomposition& dec, const StateFunction& f,
                        const StateFunction& h, double alpha, double s);

/// Rows "y,g1,G_alpha,pairing" of the integrands at state x.
void write_profile_csv(std::ostream& out, const HalfSpaceField& hs_f, const HalfSpaceField& hs_h,
                       double alpha, Eigen::Index x);

/// ||G_alpha f||_q / ||f||_p on Gaussians in R^d: value is the larger of the
/// refinement drift and the dilation spread.
CheckReport hls_gfunction_check(const continuum::HlsSetup& setup, double tolerance = 0.05);

/// ||G_alpha f||_q / ||f||_p for one grid field.
double gfunction_ratio(const continuum::GridField& f, double alpha, double p);

}  // namespace shls::functionals
