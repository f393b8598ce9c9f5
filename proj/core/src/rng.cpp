#include "levymax/rng.hpp"

namespace levymax {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

Philox4x32::Philox4x32(StreamKey key) {
  key_ = {static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
  counter_ = {0u, 0u, key.stream, key.replicate};
}

void Philox4x32::refill() {
  buffer_ = block(counter_, key_);
  if (++counter_[0] == 0) ++counter_[1];
  position_ = 0;
}

Philox4x32::result_type Philox4x32::operator()() {
  if (position_ == 4) refill();
  return buffer_[position_++];
}

void Philox4x32::discard(std::uint64_t n) {
  while (n > 0 && position_ < 4) {
    ++position_;
    --n;
  }
  if (n == 0) return;
  const std::uint64_t blocks = n / 4;
  std::uint64_t block_index = (static_cast<std::uint64_t>(counter_[1]) << 32) | counter_[0];
  block_index += blocks;
  counter_[0] = static_cast<std::uint32_t>(block_index);
  counter_[1] = static_cast<std::uint32_t>(block_index >> 32);
  const unsigned rest = static_cast<unsigned>(n % 4);
  if (rest > 0) {
    refill();
    position_ = rest;
  }
}

double Philox4x32::uniform01() {
  const std::uint64_t hi = (*this)() >> 5;  // 27 bits
  const std::uint64_t lo = (*this)() >> 6;  // 26 bits
  return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

}  // namespace levymax
