#include "shls/grid.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace shls::continuum {

double GridSpec::cell_volume() const { return std::pow(spacing(), d); }

std::size_t GridSpec::total() const {
  std::size_t t = 1;
  for (int k = 0; k < d; ++k) t *= static_cast<std::size_t>(n);
  return t;
}

void GridSpec::validate() const {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("grid: dimension must be in 1..4");
  if (n < 2) throw std::invalid_argument("grid: need at least 2 nodes per axis");
  if (!(extent > 0.0)) throw std::invalid_argument("grid: extent must be positive");
}

std::size_t GridSpec::linear(const Index& idx) const {
  std::size_t k = 0;
  for (int a = 0; a < d; ++a) k = k * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[a]);
  return k;
}

Index GridSpec::unravel(std::size_t k) const {
  Index idx{};
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(k % static_cast<std::size_t>(n));
    k /= static_cast<std::size_t>(n);
  }
  return idx;
}

Point GridSpec::point(const Index& idx) const {
  Point x{};
  for (int a = 0; a < d; ++a) x[a] = coord(idx[a]);
  return x;
}

GridField GridField::sample(const GridSpec& s, const std::function<double(const Point&)>& g) {
  s.validate();
  GridField f(s);
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = g(s.point(s.unravel(k)));
  return f;
}

double GridField::mass() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * spec.cell_volume();
}

double GridField::lp_norm(double p) const {
  if (std::isinf(p)) return max_abs();
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm: p must be positive");
  double sum = 0.0;
  for (double v : values) sum += std::pow(std::abs(v), p);
  return std::pow(sum * spec.cell_volume(), 1.0 / p);
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double GridField::boundary_max() const {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const Index idx = spec.unravel(k);
    bool edge = false;
    for (int a = 0; a < spec.d; ++a) edge = edge || idx[a] == 0 || idx[a] == spec.n - 1;
    if (edge) m = std::max(m, std::abs(values[k]));
  }
  return m;
}

void check_boundary(GridField& field, double rel) {
  const double top = field.max_abs();
  const double edge = field.boundary_max();
  if (top > 0.0 && edge > rel * top) {
    field.warnings.push_back("boundary values reach " + std::to_string(edge / top) +
                             " of the maximum; truncation error expected");
  }
}

double grid_inner(const GridField& f, const GridField& h) {
  if (f.values.size() != h.values.size()) throw std::invalid_argument("grid_inner: grid mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) sum += f.values[k] * h.values[k];
  return sum * f.spec.cell_volume();
}

void write_field(const GridField& field, const std::string& stem) {
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + stem + ".bin");
  for (double v : field.values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    bin.write(bytes, 8);
  }
  const GridSpec& s = field.spec;
  nlohmann::ordered_json j;
  j["d"] = s.d;
  j["extents"] = std::vector<double>(static_cast<std::size_t>(s.d), s.extent);
  j["spacings"] = std::vector<double>(static_cast<std::size_t>(s.d), s.spacing());
  j["shape"] = std::vector<int>(static_cast<std::size_t>(s.d), s.n);
  std::ofstream meta(stem + ".json");
  meta << j.dump(2) << '\n';
}

GridField read_field(const std::string& stem) {
  std::ifstream meta(stem + ".json");
  if (!meta) throw std::invalid_argument("cannot open " + stem + ".json");
  const auto j = nlohmann::json::parse(meta);
  GridSpec s;
  s.d = j.at("d").get<int>();
  const auto shape = j.at("shape").get<std::vector<int>>();
  const auto extents = j.at("extents").get<std::vector<double>>();
  if (shape.size() != static_cast<std::size_t>(s.d) || extents.size() != shape.size()) {
    throw std::invalid_argument("field sidecar: shape/extents length differs from d");
  }
  for (std::size_t a = 1; a < shape.size(); ++a) {
    if (shape[a] != shape[0] || extents[a] != extents[0]) {
      throw std::invalid_argument("field sidecar: only cubic grids are supported");
    }
  }
  s.n = shape[0];
  s.extent = extents[0];
  s.validate();

  GridField f(s);
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::invalid_argument("cannot open " + stem + ".bin");
  for (double& v : f.values) {
    char bytes[8];
    if (!bin.read(bytes, 8)) throw std::invalid_argument("field data shorter than its shape");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
  return f;
}

}  // namespace shls::continuum
