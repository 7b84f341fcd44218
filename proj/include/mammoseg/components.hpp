#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "mammoseg/error.hpp"
#include "mammoseg/raster.hpp"

namespace mammoseg {

struct BoundingBox {
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;  // inclusive
  int max_y = 0;  // inclusive
  int width() const { return max_x - min_x + 1; }
  int height() const { return max_y - min_y + 1; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct RegionStats {
  std::int32_t label = 0;
  std::int64_t area = 0;
  BoundingBox bbox;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
};

struct Components {
  LabelMap labels;
  /// regions[i] describes label i + 1.
  std::vector<RegionStats> regions;

  std::int32_t count() const { return static_cast<std::int32_t>(regions.size()); }
};

namespace detail {

inline constexpr std::array<std::array<int, 2>, 8> kNeighbours8{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
inline constexpr std::array<std::array<int, 2>, 4> kNeighbours4{
    {{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};

inline void check_connectivity(int connectivity) {
  if (connectivity != 4 && connectivity != 8) {
    throw Error(ErrorCode::InvalidArgument, "connectivity must be 4 or 8");
  }
}

template <typename Fn>
void for_each_neighbour(int connectivity, int x, int y, Fn&& fn) {
  if (connectivity == 4) {
    for (auto [dx, dy] : kNeighbours4) fn(x + dx, y + dy);
  } else {
    for (auto [dx, dy] : kNeighbours8) fn(x + dx, y + dy);
  }
}

}  // namespace detail

/// Per-label area, bounding box and centroid for labels 1..max label.
inline std::vector<RegionStats> region_stats(const LabelMap& labels) {
  std::int32_t k = 0;
  for (auto v : labels) k = std::max(k, v);
  std::vector<RegionStats> stats(static_cast<std::size_t>(k));
  std::vector<double> sx(stats.size(), 0.0);
  std::vector<double> sy(stats.size(), 0.0);
  for (std::size_t i = 0; i < stats.size(); ++i) stats[i].label = static_cast<std::int32_t>(i + 1);

  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const auto l = labels(x, y);
      if (l <= 0) continue;
      auto& s = stats[static_cast<std::size_t>(l - 1)];
      if (s.area == 0) {
        s.bbox = {x, y, x, y};
      } else {
        s.bbox.min_x = std::min(s.bbox.min_x, x);
        s.bbox.min_y = std::min(s.bbox.min_y, y);
        s.bbox.max_x = std::max(s.bbox.max_x, x);
        s.bbox.max_y = std::max(s.bbox.max_y, y);
      }
      ++s.area;
      sx[static_cast<std::size_t>(l - 1)] += x;
      sy[static_cast<std::size_t>(l - 1)] += y;
    }
  }
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (stats[i].area > 0) {
      stats[i].centroid_x = sx[i] / static_cast<double>(stats[i].area);
      stats[i].centroid_y = sy[i] / static_cast<double>(stats[i].area);
    }
  }
  return stats;
}

/// Labels foreground components in raster order of first encounter.
inline Components connected_components(const BinaryMask& mask, int connectivity = 8) {
  detail::check_connectivity(connectivity);
  LabelMap labels(mask.width(), mask.height(), 0);
  std::int32_t next = 0;
  std::deque<std::size_t> queue;

  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y) || labels(x, y) != 0) continue;
      ++next;
      labels(x, y) = next;
      queue.push_back(labels.index(x, y));
      while (!queue.empty()) {
        const auto i = queue.front();
        queue.pop_front();
        const int px = static_cast<int>(i % static_cast<std::size_t>(mask.width()));
        const int py = static_cast<int>(i / static_cast<std::size_t>(mask.width()));
        detail::for_each_neighbour(connectivity, px, py, [&](int nx, int ny) {
          if (mask.contains(nx, ny) && mask(nx, ny) && labels(nx, ny) == 0) {
            labels(nx, ny) = next;
            queue.push_back(labels.index(nx, ny));
          }
        });
      }
    }
  }
  Components out{std::move(labels), {}};
  out.regions = region_stats(out.labels);
  return out;
}

}  // namespace mammoseg
