#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mammoseg/error.hpp"
#include "mammoseg/raster.hpp"

namespace mammoseg {

/// Exact window x window median with edge replication at the borders.
inline GrayImage median_filter(const GrayImage& image, int window = 3) {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorCode::EvenWindow, "median window must be odd and positive");
  }
  const int r = window / 2;
  const int w = image.width();
  const int h = image.height();
  GrayImage out(w, h);
  std::vector<std::uint8_t> samples(static_cast<std::size_t>(window) * window);
  const auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t k = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -r; dx <= r; ++dx) {
          samples[k++] = image(std::clamp(x + dx, 0, w - 1), yy);
        }
      }
      std::nth_element(samples.begin(), mid, samples.end());
      out(x, y) = *mid;
    }
  }
  return out;
}

}  // namespace mammoseg
