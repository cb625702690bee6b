#include "stocon/rng.hpp"

#include <cmath>

namespace stocon {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  const std::uint32_t n0 = hi1 ^ c[1] ^ k0;
  const std::uint32_t n2 = hi0 ^ c[3] ^ k1;
  c[0] = n0;
  c[1] = lo1;
  c[2] = n2;
  c[3] = lo0;
}

inline void philox10(std::uint64_t key, std::uint64_t hi_ctr, std::uint64_t lo_ctr,
                     std::uint32_t out[4]) {
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  out[0] = static_cast<std::uint32_t>(lo_ctr);
  out[1] = static_cast<std::uint32_t>(lo_ctr >> 32);
  out[2] = static_cast<std::uint32_t>(hi_ctr);
  out[3] = static_cast<std::uint32_t>(hi_ctr >> 32);
  for (int r = 0; r < 10; ++r) {
    philox_round(out, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Rng Rng::stream(std::uint64_t tag) const {
  return Rng(key_, splitmix64(sid_ ^ splitmix64(tag)));
}

Rng Rng::stream(std::uint64_t t1, std::uint64_t t2) const {
  return stream(t1).stream(t2);
}

Rng Rng::stream(std::uint64_t t1, std::uint64_t t2, std::uint64_t t3) const {
  return stream(t1).stream(t2).stream(t3);
}

void Rng::refill() {
  philox10(key_, sid_, block_, out_);
  ++block_;
  avail_ = 4;
}

std::uint32_t Rng::next_u32() {
  if (avail_ == 0) refill();
  return out_[4 - avail_--];
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_normal_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection keeps the draw unbiased for any bound.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v >= threshold) return v % bound;
  }
}

}  // namespace stocon
