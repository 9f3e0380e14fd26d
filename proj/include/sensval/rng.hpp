#pragma once

#include <cstdint>

namespace sensval {

// Counter-based pseudorandom generator. Output number i of the stream
// identified by (seed, stream_id) is a fixed avalanche hash of
// (seed, stream_id, i), so
//   - sequences are bit-identical across runs and thread counts,
//   - any position is reachable in O(1) (no sequential state to replay),
//   - a stream is unaffected by how many draws other streams consume.
// Monte-Carlo loops give each task its own substream and stay deterministic
// under any parallel schedule.
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_(stream_id), counter_(0) {
    const std::uint64_t a = mix64(seed + 0x9e3779b97f4a7c15ULL);
    const std::uint64_t b = mix64(stream_id + 0xbf58476d1ce4e5b9ULL);
    base_ = mix64(a ^ (b + 0x94d049bb133111ebULL + (a << 6) + (a >> 2)));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Independent stream derived from this one; used to key parallel tasks.
  Rng substream(std::uint64_t k) const {
    return Rng(seed_, mix64(stream_ + 0x9e3779b97f4a7c15ULL * (k + 1)));
  }

  std::uint64_t next_u64() {
    return mix64(base_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  // Uniform on the open interval (0,1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
  std::uint64_t base_;
};

}  // namespace sensval
