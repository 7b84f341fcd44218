#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <numeric>

#include "mammoseg/error.hpp"
#include "mammoseg/raster.hpp"

namespace mammoseg {

struct Histogram {
  std::array<std::uint64_t, 256> bins{};

  std::uint64_t total() const {
    return std::accumulate(bins.begin(), bins.end(), std::uint64_t{0});
  }
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

inline Histogram histogram(const GrayImage& image) {
  Histogram h;
  for (auto v : image) ++h.bins[v];
  return h;
}

namespace detail {

// Minimal unsigned 256-bit integer: enough to compare between-class variances
// exactly for any image up to 2^30 pixels.
struct U256 {
  std::array<std::uint64_t, 4> limb{};  // little-endian

  static U256 mul(unsigned __int128 a, unsigned __int128 b) {
    const std::uint64_t a0 = static_cast<std::uint64_t>(a), a1 = static_cast<std::uint64_t>(a >> 64);
    const std::uint64_t b0 = static_cast<std::uint64_t>(b), b1 = static_cast<std::uint64_t>(b >> 64);
    U256 r;
    r.add_at(0, static_cast<unsigned __int128>(a0) * b0);
    r.add_at(1, static_cast<unsigned __int128>(a0) * b1);
    r.add_at(1, static_cast<unsigned __int128>(a1) * b0);
    r.add_at(2, static_cast<unsigned __int128>(a1) * b1);
    return r;
  }

  U256 times(std::uint64_t m) const {
    U256 r;
    for (int i = 0; i < 4; ++i) {
      if (limb[i] != 0) r.add_at(i, static_cast<unsigned __int128>(limb[i]) * m);
    }
    return r;
  }

  friend auto operator<=>(const U256& a, const U256& b) {
    for (int i = 3; i >= 0; --i) {
      if (a.limb[i] != b.limb[i]) return a.limb[i] <=> b.limb[i];
    }
    return std::strong_ordering::equal;
  }
  friend bool operator==(const U256&, const U256&) = default;

 private:
  void add_at(int pos, unsigned __int128 v) {
    for (int i = pos; i < 4 && v != 0; ++i) {
      const unsigned __int128 sum = static_cast<unsigned __int128>(limb[i]) + static_cast<std::uint64_t>(v);
      limb[i] = static_cast<std::uint64_t>(sum);
      v = (v >> 64) + (sum >> 64);
    }
  }
};

// Between-class variance scaled by N^2 is (S0*N - S*n0)^2 / (n0*n1), kept as
// an exact fraction. Empty classes score zero.
struct SplitScore {
  unsigned __int128 abs_diff = 0;
  std::uint64_t denom = 1;  // n0 * n1, or 1 for a degenerate split

  static SplitScore of(std::uint64_t n0, std::uint64_t s0, std::uint64_t n, std::uint64_t s) {
    const std::uint64_t n1 = n - n0;
    if (n0 == 0 || n1 == 0) return {};
    const auto lhs = static_cast<unsigned __int128>(s0) * n;
    const auto rhs = static_cast<unsigned __int128>(s) * n0;
    return {lhs > rhs ? lhs - rhs : rhs - lhs, n0 * n1};
  }

  bool greater_than(const SplitScore& o) const {
    return U256::mul(abs_diff, abs_diff).times(o.denom) >
           U256::mul(o.abs_diff, o.abs_diff).times(denom);
  }
};

}  // namespace detail

/// Otsu's global threshold. Class 0 is intensities <= t, class 1 is > t.
/// Returns the smallest t maximising the between-class variance; a split
/// with an empty class scores zero, so a single-valued histogram gives 0.
inline int otsu_threshold(const Histogram& hist) {
  const std::uint64_t n = hist.total();
  if (n == 0) throw Error(ErrorCode::EmptyHistogram, "histogram has no samples");
  if (n > (std::uint64_t{1} << 30)) {
    throw Error(ErrorCode::InvalidArgument, "histogram holds more than 2^30 samples");
  }

  std::uint64_t s = 0;
  for (int v = 0; v < 256; ++v) s += hist.bins[v] * static_cast<std::uint64_t>(v);

  int best_t = 0;
  detail::SplitScore best;
  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist.bins[t];
    s0 += hist.bins[t] * static_cast<std::uint64_t>(t);
    const auto score = detail::SplitScore::of(n0, s0, n, s);
    if (score.greater_than(best)) {
      best = score;
      best_t = t;
    }
  }
  return best_t;
}

/// Foreground where intensity > t (or <= t when `invert`).
inline BinaryMask binarize(const GrayImage& image, int t, bool invert = false) {
  if (t < 0 || t > 255) throw Error(ErrorCode::InvalidArgument, "threshold must be in [0,255]");
  BinaryMask out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const bool above = image[i] > t;
    out[i] = (above != invert) ? 1 : 0;
  }
  return out;
}

}  // namespace mammoseg
