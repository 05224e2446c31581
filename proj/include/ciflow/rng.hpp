#pragma once

// Counter-based Philox4x32-10 generator. Every draw is a pure function of
// (key, counter), so streams can be indexed by sample number and step without
// any shared state between workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace ciflow::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {
inline constexpr std::uint32_t kMulA = 0xD2511F53u;
inline constexpr std::uint32_t kMulB = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeylA = 0x9E3779B9u;
inline constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                              std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}
}  // namespace detail

constexpr Counter philox4x32(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
    detail::mulhilo(detail::kMulA, ctr[0], hi0, lo0);
    detail::mulhilo(detail::kMulB, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += detail::kWeylA;
    key[1] += detail::kWeylB;
  }
  return ctr;
}

inline constexpr Key make_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Uniform double in the open interval (0, 1) from 64 random bits.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Two independent standard normals from one Philox block (Box-Muller).
inline std::pair<double, double> normal_pair(const Counter& ctr, const Key& key) {
  const Counter r = philox4x32(ctr, key);
  const double u1 = to_open_unit(r[0], r[1]);
  const double u2 = to_open_unit(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Sequential convenience stream over a fixed (key, stream id) pair.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(make_key(seed)),
        stream_lo_(static_cast<std::uint32_t>(stream_id)),
        stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

  double uniform() {
    fill_if_empty();
    const double u = to_open_unit(buffer_[cursor_], buffer_[cursor_ + 1]);
    cursor_ += 2;
    return u;
  }

  double normal() {
    if (has_spare_normal_) {
      has_spare_normal_ = false;
      return spare_normal_;
    }
    const auto [a, b] = normal_pair(next_counter(), key_);
    spare_normal_ = b;
    has_spare_normal_ = true;
    return a;
  }

  std::uint64_t bits() {
    fill_if_empty();
    const std::uint64_t v = (static_cast<std::uint64_t>(buffer_[cursor_]) << 32) | buffer_[cursor_ + 1];
    cursor_ += 2;
    return v;
  }

 private:
  Counter next_counter() {
    const Counter c{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                    stream_lo_, stream_hi_};
    ++block_;
    return c;
  }
  void fill_if_empty() {
    if (cursor_ >= 4) {
      buffer_ = philox4x32(next_counter(), key_);
      cursor_ = 0;
    }
  }

  Key key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  Counter buffer_{};
  int cursor_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

}  // namespace ciflow::rng
