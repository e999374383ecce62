#pragma once

#include "shls/chain.hpp"

#include <cstdint>
#include <string>

namespace shls::spectral {

/// L = [[-1, 1], [1, -1]], m = (1, 1).
ChainModel two_state_chain();

/// Unit-rate cycle on three states, m = (1, 1, 1).
ChainModel three_cycle_chain();

/// Reversible chain built from random symmetric conductances c_ij on a
/// connected graph: L_ij = c_ij / m_i with random m. Deterministic in seed.
ChainModel random_reversible_chain(std::size_t n, std::uint64_t seed, double density = 0.5);

/// Random function with normal entries.
StateFunction random_function(std::size_t n, std::uint64_t seed);

/// Random function with its m-mean removed.
StateFunction random_zero_mean_function(const ChainModel& model, std::uint64_t seed);

/// Random function with entries in [0, 1).
StateFunction random_nonnegative_function(std::size_t n, std::uint64_t seed);

/// "builtin:two-state", "builtin:three-cycle", "builtin:random-<n>-<seed>" or a
/// path to a chain JSON file.
ChainModel resolve_chain(const std::string& spec);

}  // namespace shls::spectral
