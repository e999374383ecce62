#pragma once

#include <cstddef>
#include <vector>

namespace shls::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (log x, log y).
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

struct MCEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
};

/// Welford accumulator. Merging is order-dependent only through rounding,
/// so callers reduce in a fixed order.
class Accumulator {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance
  MCEstimate estimate() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

MCEstimate estimate(const std::vector<double>& samples);

/// Upper-tail p-value of Pearson's statistic for observed counts against
/// expected probabilities.
double chi_square_p_value(const std::vector<double>& observed, const std::vector<double>& probabilities);

}  // namespace shls::stats
