#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mammoseg/raster.hpp"

namespace mammoseg {

namespace detail {

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher). `f` holds squared
// distances along one line; the result is written back in place.
inline void squared_distance_1d(std::vector<std::int64_t>& f, std::vector<int>& v,
                                std::vector<double>& z, std::vector<std::int64_t>& d) {
  const int n = static_cast<int>(f.size());
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kInf) continue;
    const double fq = static_cast<double>(f[q]) + static_cast<double>(q) * q;
    while (k >= 0) {
      const int p = v[k];
      const double s = (fq - (static_cast<double>(f[p]) + static_cast<double>(p) * p)) /
                       (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        ++k;
        v[k] = q;
        z[k] = s;
        break;
      }
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
    }
  }
  if (k < 0) return;  // no finite sites on this line
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (j < k && z[j + 1] < q) ++j;
    const std::int64_t dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
  std::copy(d.begin(), d.begin() + n, f.begin());
}

}  // namespace detail

/// Exact Euclidean distance from each foreground pixel centre to the nearest
/// background pixel centre. Pixels just outside the image count as background.
inline ScalarField distance_transform(const BinaryMask& mask) {
  const int w = mask.width() + 2;
  const int h = mask.height() + 2;
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  std::vector<std::int64_t> sq(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) sq[static_cast<std::size_t>(y + 1) * w + (x + 1)] = kInf;

  // Columns: every padded column has background at both ends.
  for (int x = 0; x < w; ++x) {
    std::int64_t run = kInf;
    for (int y = 0; y < h; ++y) {
      auto& cell = sq[static_cast<std::size_t>(y) * w + x];
      run = cell == 0 ? 0 : (run >= kInf ? kInf : run + 1);
      cell = run;
    }
    run = kInf;
    for (int y = h - 1; y >= 0; --y) {
      auto& cell = sq[static_cast<std::size_t>(y) * w + x];
      run = cell == 0 ? 0 : (run >= kInf ? kInf : run + 1);
      cell = std::min(cell, run);
    }
    for (int y = 0; y < h; ++y) {
      auto& cell = sq[static_cast<std::size_t>(y) * w + x];
      cell = cell * cell;
    }
  }

  std::vector<std::int64_t> f(static_cast<std::size_t>(w));
  std::vector<int> v(static_cast<std::size_t>(w));
  std::vector<double> z(static_cast<std::size_t>(w));
  std::vector<std::int64_t> d(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = sq[static_cast<std::size_t>(y) * w + x];
    detail::squared_distance_1d(f, v, z, d);
    for (int x = 0; x < w; ++x) sq[static_cast<std::size_t>(y) * w + x] = f[x];
  }

  ScalarField out(mask.width(), mask.height(), 0.0);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      out(x, y) = std::sqrt(static_cast<double>(sq[static_cast<std::size_t>(y + 1) * w + (x + 1)]));
  return out;
}

}  // namespace mammoseg
