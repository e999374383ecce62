#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "shls/continuum.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <omp.h>

#include <cmath>
#include <filesystem>

using namespace shls;
using namespace shls::continuum;

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

double gaussian_riesz_origin(int d, double alpha) {
  // c(d, alpha) |S^{d-1}| int_0^inf r^{alpha-1} e^{-r^2/2} dr
  const double sphere = 2.0 * std::pow(kPi, 0.5 * d) / boost::math::tgamma(0.5 * d);
  return riesz_constant(d, alpha) * sphere * std::pow(2.0, 0.5 * alpha - 1.0) * boost::math::tgamma(0.5 * alpha);
}

}  // namespace

TEST_CASE("grid geometry") {
  const GridSpec s{3, 10, 2.0};
  CHECK(s.spacing() == doctest::Approx(0.4));
  CHECK(s.coord(0) == doctest::Approx(-1.8));
  CHECK(s.total() == 1000);
  const Index i{3, 7, 1, 0};
  CHECK(s.unravel(s.linear(i)) == i);
  CHECK_THROWS((GridSpec{5, 10, 1.0}.validate()));
}

TEST_CASE("band-limited kernel against direct quadrature") {
  boost::math::quadrature::tanh_sinh<double> q;
  const double h = 0.25;
  for (double t : {0.001, 0.01, 0.05})
    for (int m : {0, 1, 3, 10}) {
      const double b = t * (kPi / h) * (kPi / h);
      const double oracle = q.integrate([&](double v) { return std::exp(-b * v * v) * std::cos(kPi * m * v); }, 0.0, 1.0);
      CHECK(heat_kernel_value(t, h, m) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("heat_apply equals a direct convolution sum") {
  const GridSpec s{2, 12, 3.0};
  const auto f = GridField::sample(s, [](const Point& x) { return std::exp(-x[0] * x[0] - 2 * x[1] * x[1]) * (1 + x[0]); });
  const double t = 0.2;
  const auto Tf = heat_apply(f, t);
  for (std::size_t k : {0ul, 30ul, 77ul, 143ul}) {
    const Index a = s.unravel(k);
    double sum = 0.0;
    for (std::size_t j = 0; j < s.total(); ++j) {
      const Index b = s.unravel(j);
      sum += heat_kernel_value(t, s.spacing(), a[0] - b[0]) * heat_kernel_value(t, s.spacing(), a[1] - b[1]) * f[j];
    }
    CHECK(Tf[k] == doctest::Approx(sum).epsilon(1e-12));
    CHECK(heat_apply_at(f, t, s.point(a)) == doctest::Approx(sum).epsilon(1e-10));
  }
}

TEST_CASE("heat flow of a Gaussian") {
  const GridSpec s{3, 48, 8.0};
  const auto f = GridField::sample(s, gaussian_profile(1.0));
  const double t = 0.5, var = 1.0 + 2.0 * t;
  const auto Tf = heat_apply(f, t);
  double err = 0.0;
  for (std::size_t k = 0; k < s.total(); ++k) {
    const Point x = s.point(s.unravel(k));
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    err = std::max(err, std::abs(Tf[k] - std::pow(var, -1.5) * std::exp(-r2 / (2 * var))));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  const GridSpec s{3, 24, 6.0};
  const auto f = GridField::sample(s, [](const Point& x) { return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])) * (1 + 0.3 * x[1]); });
  omp_set_num_threads(4);
  const auto par = heat_apply(f, 0.3);
  const auto ser = reference::heat_apply(f, 0.3);
  CHECK(par.values == ser.values);
  const std::vector<Index> nodes{{12, 12, 12, 0}, {8, 13, 15, 0}};
  CHECK(riesz_apply(f, 1.0, nodes) == reference::riesz_apply(f, 1.0, nodes));
}

TEST_CASE("Riesz constant: Newtonian kernel 1/(4 pi |x|) for d = 3, alpha = 2") {
  CHECK(riesz_constant(3, 2.0) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-14));
}

TEST_CASE("Riesz potential of a Gaussian at the origin") {
  const GridSpec s{3, 41, 8.0};
  const auto f = GridField::sample(s, gaussian_profile(1.0));
  const int c = s.n / 2;
  for (double alpha : {0.5, 1.0, 2.0}) {
    const double oracle = gaussian_riesz_origin(3, alpha);
    CHECK(riesz_apply(f, alpha, {{c, c, c, 0}})[0] == doctest::Approx(oracle).epsilon(1e-3));
    const auto hist = HeatHistory::at_points(f, {Point{}});
    CHECK(hist.fractional_integral(alpha)[0] == doctest::Approx(oracle).epsilon(1e-3));
  }
  CHECK(gaussian_riesz_origin(3, 1.0) == doctest::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-14));
}

TEST_CASE("riesz_apply rejects boundary nodes") {
  const GridSpec s{3, 16, 4.0};
  const auto f = GridField::sample(s, gaussian_profile(1.0));
  CHECK_THROWS_AS(riesz_apply(f, 1.0, {{0, 8, 8, 0}}), std::invalid_argument);
}

TEST_CASE("HLS exponent") {
  CHECK(hls_exponent(3, 1.0, 2.0) == doctest::Approx(6.0));
  CHECK_THROWS(hls_exponent(3, 1.0, 3.0));
  CHECK_THROWS(hls_exponent(3, 1.0, 1.0));
}

TEST_CASE("property: HLS ratio is dilation invariant") {
  const GridSpec s{3, 32, 9.0};
  std::vector<double> ratios;
  for (double r : {0.8, 1.0, 1.25}) {
    const auto f = GridField::sample(s, [r](const Point& x) { return gaussian_profile(1.5)({x[0] * r, x[1] * r, x[2] * r, 0}); });
    ratios.push_back(hls_ratio(f, f, 1.0, 2.0));
  }
  CHECK(ratios[0] == doctest::Approx(ratios[1]).epsilon(5e-3));
  CHECK(ratios[2] == doctest::Approx(ratios[1]).epsilon(5e-3));
}

TEST_CASE("field files round trip") {
  const GridSpec s{2, 8, 1.0};
  const auto f = GridField::sample(s, [](const Point& x) { return x[0] - 2 * x[1]; });
  const auto stem = (std::filesystem::temp_directory_path() / "shls_field").string();
  write_field(f, stem);
  const auto g = read_field(stem);
  CHECK(g.values == f.values);
  CHECK(g.spec.n == 8);
  std::filesystem::remove(stem + ".bin");
  std::filesystem::remove(stem + ".json");
}
