#include "shls/chain_library.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace shls::spectral {

ChainModel two_state_chain() {
  ChainModel model;
  model.generator.resize(2, 2);
  model.generator << -1.0, 1.0, 1.0, -1.0;
  model.weights = Vector::Ones(2);
  return model;
}

ChainModel three_cycle_chain() {
  ChainModel model;
  model.generator.resize(3, 3);
  model.generator << -2.0, 1.0, 1.0,
                      1.0, -2.0, 1.0,
                      1.0, 1.0, -2.0;
  model.weights = Vector::Ones(3);
  return model;
}

ChainModel random_reversible_chain(std::size_t n, std::uint64_t seed, double density) {
  if (n == 0) throw std::invalid_argument("random chain: n must be positive");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto N = static_cast<Eigen::Index>(n);

  Vector m(N);
  for (Eigen::Index i = 0; i < N; ++i) m(i) = 0.5 + unit(gen);

  Matrix c = Matrix::Zero(N, N);
  // A random spanning path keeps the chain irreducible.
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), gen);
  for (std::size_t k = 1; k < n; ++k) {
    const double w = 0.2 + unit(gen);
    c(order[k - 1], order[k]) = w;
    c(order[k], order[k - 1]) = w;
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      if (c(i, j) == 0.0 && unit(gen) < density) {
        const double w = 0.2 + unit(gen);
        c(i, j) = w;
        c(j, i) = w;
      }
    }
  }

  ChainModel model;
  model.weights = m;
  model.generator = m.cwiseInverse().asDiagonal() * c;
  for (Eigen::Index i = 0; i < N; ++i) model.generator(i, i) = -model.generator.row(i).sum();
  return model;
}

StateFunction random_function(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  StateFunction f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = normal(gen);
  return f;
}

StateFunction random_zero_mean_function(const ChainModel& model, std::uint64_t seed) {
  StateFunction f = random_function(model.size(), seed);
  const double mean = model.weights.dot(f) / model.weights.sum();
  f.array() -= mean;
  return f;
}

StateFunction random_nonnegative_function(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  StateFunction f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = unit(gen);
  return f;
}

ChainModel resolve_chain(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) != 0) return load_chain(spec);
  const std::string name = spec.substr(prefix.size());
  if (name == "two-state") return two_state_chain();
  if (name == "three-cycle") return three_cycle_chain();
  if (name.rfind("random-", 0) == 0) {
    const std::string rest = name.substr(7);
    const auto dash = rest.find('-');
    try {
      const auto n = std::stoul(rest.substr(0, dash));
      const auto seed = dash == std::string::npos ? 1ULL : std::stoull(rest.substr(dash + 1));
      return random_reversible_chain(n, seed);
    } catch (const std::logic_error&) {
    }
  }
  throw std::invalid_argument("unknown chain '" + spec +
                              "' (builtin:two-state, builtin:three-cycle, builtin:random-<n>-<seed>, or a JSON file)");
}

}  // namespace shls::spectral
