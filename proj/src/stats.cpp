#include "shls/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/statistics/linear_regression.hpp>

#include <cmath>
#include <stdexcept>

namespace shls::stats {

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("loglog_fit: need >= 3 matching points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_fit: data must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const auto [c0, c1, r2] = boost::math::statistics::simple_ordinary_least_squares_with_R_squared(lx, ly);
  return {c1, c0, r2};
}

void Accumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double Accumulator::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

MCEstimate Accumulator::estimate() const {
  return {mean_, n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0, n_};
}

MCEstimate estimate(const std::vector<double>& samples) {
  Accumulator acc;
  for (double v : samples) acc.add(v);
  return acc.estimate();
}

double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& probabilities) {
  if (observed.size() != probabilities.size() || observed.size() < 2) {
    throw std::invalid_argument("chi-square: need >= 2 matching categories");
  }
  double total = 0.0;
  for (double o : observed) total += o;
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * probabilities[i];
    stat += (observed[i] - e) * (observed[i] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace shls::stats
