#pragma once

#include <cstdint>
#include <random>

namespace pgamarket {

// Deterministic uniform stream. Substream `id` under `seed` is a fixed
// function of both, so replication r can be regenerated in isolation.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : engine_(derive_seed(seed, stream_id)) {}

  // Uniform on [0, 1) with 53 random bits; independent of the standard
  // library's distribution implementation.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pgamarket
