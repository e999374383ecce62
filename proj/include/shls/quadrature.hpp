#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace shls {

/// Node/weight rule for integrals over (0, inf). Rules built here come from
/// the substitution t = e^u with a uniform u-lattice, so that
///   int g(t) dt  ~=  sum_k weights[k] * g(nodes[k]),   weights[k] = du * nodes[k].
/// The lattice is left untruncated in spirit: callers add closed-form sums for
/// the lattice points beyond either end.
struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // strictly positive
  double tolerance = 0.0;       // target the rule was built for
  double log_step = 0.0;        // du
  std::string substitution;

  std::size_t size() const { return nodes.size(); }

  /// Lattice u_k = ln(lo) + k du for k = 0..K, with u_K the first point >= ln(hi).
  static QuadratureRule log_lattice(double lo, double hi, double log_step,
                                    double tolerance = 0.0);

  /// Writes "node,weight" rows with a header line.
  void write_csv(std::ostream& out) const;
};

/// Sum_{j>=1} ratio^j for 0 <= ratio < 1, i.e. the lattice terms beyond an
/// endpoint when the integrand is geometric in u there.
double geometric_tail(double ratio);

}  // namespace shls
