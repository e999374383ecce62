#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace shls::continuum {

inline constexpr int kMaxDim = 4;
using Point = std::array<double, kMaxDim>;
using Index = std::array<int, kMaxDim>;

/// Cell-centred tensor grid on [-extent, extent]^d with n nodes per axis:
/// x_i = -extent + (i + 1/2) h, h = 2 extent / n. Symmetric about the origin;
/// the origin is a node exactly when n is odd.
struct GridSpec {
  int d = 3;
  int n = 48;
  double extent = 8.0;

  double spacing() const { return 2.0 * extent / n; }
  double coord(int i) const { return -extent + (i + 0.5) * spacing(); }
  double cell_volume() const;
  std::size_t total() const;
  void validate() const;

  std::size_t linear(const Index& idx) const;
  Index unravel(std::size_t k) const;
  Point point(const Index& idx) const;
};

struct GridField {
  GridSpec spec;
  std::vector<double> values;
  std::vector<std::string> warnings;

  GridField() = default;
  explicit GridField(const GridSpec& s) : spec(s), values(s.total(), 0.0) {}

  static GridField sample(const GridSpec& s, const std::function<double(const Point&)>& g);

  double operator[](std::size_t k) const { return values[k]; }
  double& operator[](std::size_t k) { return values[k]; }

  /// sum of values times h^d
  double mass() const;
  /// (sum |v|^p h^d)^{1/p}; p = inf gives max |v|
  double lp_norm(double p) const;
  double max_abs() const;
  /// max |v| over nodes on the outer layer of the grid
  double boundary_max() const;
};

/// Adds a warning when boundary values exceed `rel` times the field maximum.
void check_boundary(GridField& field, double rel = 1e-12);

/// <f, h> with cell weight h^d.
double grid_inner(const GridField& f, const GridField& h);

/// Raw values as 8-byte little-endian doubles in `stem + ".bin"`, geometry in
/// `stem + ".json"` as {d, extents, spacings, shape}.
void write_field(const GridField& field, const std::string& stem);
GridField read_field(const std::string& stem);

}  // namespace shls::continuum
