#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <utility>
#include <vector>

namespace msig {

/// Deterministic splitmix64 stream. Streams are addressed by a key path so a
/// draw depends only on (seed, key), never on what other streams consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double next_double();

  /// Uniform in [0, n), unbiased via rejection. n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (two draws per call).
  double normal(double mean = 0.0, double sigma = 1.0);

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
  }

 private:
  std::uint64_t state_;
};

/// FNV-1a over the bytes of a string, for keying streams by identifiers.
std::uint64_t hash_key(std::string_view s);

std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b);

/// Stream keyed by (seed, path...). Same path, same stream; any change to a
/// path component yields an unrelated stream.
Rng keyed_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace msig
