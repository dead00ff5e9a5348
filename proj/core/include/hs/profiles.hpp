#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hs/core.hpp"

namespace hs {

/// Deterministic profile families.
///
///   ones                 all entries 1
///   constant:c           all entries c
///   block:a,b/c,d        equal row and column blocks; row p, column q of the
///                        level table fills block (p, q)
///   uniform:lo,hi        iid uniform entries on [lo, hi]
///   spiked:k,h           all ones except k distinct random entries set to h
struct ProfileGenerator {
  enum class Kind { constant, block, uniform, spiked };

  Kind kind = Kind::constant;
  double value = 1.0;                        // constant level
  std::vector<std::vector<double>> levels;   // block level table
  double lo = 0.0;
  double hi = 1.0;
  std::size_t spikes = 0;
  double spike_height = 0.0;

  static ProfileGenerator parse(std::string_view text);
  std::string to_string() const;

  /// Whether the output depends on the seed.
  bool random() const noexcept { return kind == Kind::uniform || kind == Kind::spiked; }

  WeightProfile generate(std::size_t n, std::size_t N, std::uint64_t seed = 0) const;
  /// Positions (i, j) of the spikes that `generate` places for this seed.
  std::vector<std::pair<std::size_t, std::size_t>> spike_positions(std::size_t n, std::size_t N,
                                                                   std::uint64_t seed) const;
};

}  // namespace hs
