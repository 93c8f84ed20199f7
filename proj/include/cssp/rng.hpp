#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cssp {

/// Seeded random stream. The pair (seed, stream_id) fully determines the
/// draw sequence; child streams are derived by label so that independent
/// trials, rounds and repeats never share state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Fresh stream at the start of its sequence, independent of how far this
  /// stream has advanced.
  RngStream derive(std::uint64_t label) const;
  RngStream derive(std::string_view label) const;

  std::mt19937_64& engine() noexcept { return engine_; }

  /// Uniform double in [0, 1) built from the top 53 bits of one draw.
  double uniform();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// FNV-1a, used to turn labels into stream ids.
std::uint64_t hash_label(std::string_view label) noexcept;

}  // namespace cssp
