#pragma once

#include <cstdint>
#include <random>

#include "mammoseg/raster.hpp"

namespace mammoseg {

struct DiskPhantom {
  int width = 128;
  int height = 128;
  std::uint8_t background = 20;
  std::uint8_t foreground = 200;
  double center_x = 64.0;
  double center_y = 64.0;
  double radius = 30.0;
  /// Fraction of pixels replaced by 0 or 255 with equal odds.
  double salt_pepper = 0.0;
  std::uint64_t seed = 1;
};

/// Bright disk on a dark field: pixel centres within `radius` are foreground.
inline GrayImage make_disk_phantom(const DiskPhantom& p) {
  GrayImage img(p.width, p.height, p.background);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const double dx = x - p.center_x;
      const double dy = y - p.center_y;
      if (dx * dx + dy * dy <= p.radius * p.radius) img(x, y) = p.foreground;
    }
  }
  if (p.salt_pepper > 0.0) {
    std::mt19937_64 rng(p.seed);
    std::bernoulli_distribution hit(p.salt_pepper);
    std::bernoulli_distribution salt(0.5);
    for (auto& v : img) {
      if (hit(rng)) v = salt(rng) ? 255 : 0;
    }
  }
  return img;
}

}  // namespace mammoseg
