#pragma once

#include <cstdint>

namespace lossrisk::specfun {

// Identifies one reproducible random stream.  Equal (seed, stream_id) give
// bit-identical variate sequences on every platform; distinct stream_ids
// give statistically independent streams.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Philox-4x64-10 counter-based generator (Salmon et al., SC 2011).
// The key is (seed, stream_id); the 256-bit counter is laid out as
// (block, substream, 0, 0), so every substream owns 2^64 blocks of four
// 64-bit words.  Monte-Carlo drivers assign one substream per sample
// index, which makes any partitioning of the sample range across workers
// produce identical output.
class Rng {
 public:
  Rng(RngStream stream, std::uint64_t substream);

  std::uint64_t next_u64();
  // uniform on the open interval (0,1)
  double u01();

 private:
  void refill();

  std::uint64_t key_[2];
  std::uint64_t ctr_[4];
  std::uint64_t buf_[4];
  int pos_;
};

}  // namespace lossrisk::specfun
