#include "lossrisk/rng.hpp"

namespace lossrisk::specfun {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline std::uint64_t mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t* hi) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  *hi = static_cast<std::uint64_t>(p >> 64);
  return static_cast<std::uint64_t>(p);
}

inline void philox_round(std::uint64_t ctr[4], const std::uint64_t key[2]) {
  std::uint64_t hi0, hi1;
  const std::uint64_t lo0 = mulhilo(kMul0, ctr[0], &hi0);
  const std::uint64_t lo1 = mulhilo(kMul1, ctr[2], &hi1);
  const std::uint64_t out0 = hi1 ^ ctr[1] ^ key[0];
  const std::uint64_t out2 = hi0 ^ ctr[3] ^ key[1];
  ctr[0] = out0;
  ctr[1] = lo1;
  ctr[2] = out2;
  ctr[3] = lo0;
}

}  // namespace

Rng::Rng(RngStream stream, std::uint64_t substream) : pos_(4) {
  key_[0] = stream.seed;
  key_[1] = stream.stream_id;
  ctr_[0] = 0;
  ctr_[1] = substream;
  ctr_[2] = 0;
  ctr_[3] = 0;
}

void Rng::refill() {
  std::uint64_t c[4] = {ctr_[0], ctr_[1], ctr_[2], ctr_[3]};
  std::uint64_t k[2] = {key_[0], key_[1]};
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    philox_round(c, k);
  }
  buf_[0] = c[0];
  buf_[1] = c[1];
  buf_[2] = c[2];
  buf_[3] = c[3];
  ++ctr_[0];  // next block within this substream
  pos_ = 0;
}

std::uint64_t Rng::next_u64() {
  if (pos_ == 4) refill();
  return buf_[pos_++];
}

double Rng::u01() {
  // 53 significant bits, shifted off zero: strictly inside (0,1)
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace lossrisk::specfun
