#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace qsteady::noise {

/// Philox4x64-10 counter-based generator (Salmon et al. 2011 constants).
/// Stateless: block(counter, key) is a pure function, so any draw can be
/// addressed directly by (seed, stream, section) without sequential state.
struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static constexpr std::string_view kName = "philox4x64-10/v1";
  static constexpr int kRounds = 10;
  static constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kM1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73BULL;

  static constexpr void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
  }

  static constexpr Counter round(const Counter& c, const Key& k) {
    std::uint64_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  static constexpr Counter block(Counter c, Key k) {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        k[0] += kW0;
        k[1] += kW1;
      }
      c = round(c, k);
    }
    return c;
  }
};

/// 53-bit uniform in [0, 1).
inline constexpr double to_unit(std::uint64_t x) { return double(x >> 11) * 0x1.0p-53; }

/// Stream tags keep independent uses of one seed apart.
namespace stream {
inline constexpr std::uint64_t kNoise = 0x6e6f697365ULL;     // "noise"
inline constexpr std::uint64_t kJumps = 0x6a756d7073ULL;     // "jumps"
inline constexpr std::uint64_t kDisorder = 0x646973ULL;      // "dis"
}  // namespace stream

/// Sequential view on one (seed, stream) key; hands out 64-bit words in
/// counter order, four per block.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t tag) : key_{seed, tag} {}

  std::uint64_t next() {
    if (pos_ == 4) {
      buf_ = Philox4x64::block({ctr_++, 0, 0, 0}, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  double uniform() { return to_unit(next()); }

 private:
  Philox4x64::Key key_;
  std::uint64_t ctr_ = 0;
  Philox4x64::Counter buf_{};
  int pos_ = 4;
};

}  // namespace qsteady::noise
