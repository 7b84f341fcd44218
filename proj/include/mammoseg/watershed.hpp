#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "mammoseg/components.hpp"
#include "mammoseg/error.hpp"
#include "mammoseg/raster.hpp"

namespace mammoseg {

namespace detail {

inline std::int32_t check_dense_labels(const LabelMap& markers) {
  std::int32_t k = 0;
  for (auto v : markers) {
    if (v < 0) throw Error(ErrorCode::InvalidArgument, "marker labels must be non-negative");
    k = std::max(k, v);
  }
  if (k == 0) throw Error(ErrorCode::NoMarkers, "watershed needs at least one marker");
  std::vector<bool> seen(static_cast<std::size_t>(k) + 1, false);
  for (auto v : markers) seen[static_cast<std::size_t>(v)] = true;
  for (std::int32_t l = 1; l <= k; ++l) {
    if (!seen[static_cast<std::size_t>(l)]) {
      throw Error(ErrorCode::InvalidArgument, "marker labels must be dense 1..K");
    }
  }
  return k;
}

inline void check_finite(const ScalarField& field) {
  for (auto v : field) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "scalar field must be finite");
  }
}

}  // namespace detail

/// Marker-controlled priority flood. Pixels are claimed by the first basin to
/// reach them, in ascending field order with FIFO tie-breaking. Without a
/// domain the whole image is flooded; pixels outside the domain stay 0.
inline LabelMap watershed(const ScalarField& field, const LabelMap& markers,
                          const std::optional<BinaryMask>& domain = std::nullopt,
                          int connectivity = 8) {
  require_same_shape(field, markers, "watershed");
  if (domain) require_same_shape(field, *domain, "watershed");
  detail::check_connectivity(connectivity);
  detail::check_finite(field);
  detail::check_dense_labels(markers);

  const auto in_domain = [&](int x, int y) { return !domain || (*domain)(x, y) != 0; };

  using Entry = std::tuple<double, std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  std::uint64_t seq = 0;

  LabelMap out(markers.width(), markers.height(), 0);
  for (int y = 0; y < markers.height(); ++y) {
    for (int x = 0; x < markers.width(); ++x) {
      const auto l = markers(x, y);
      if (l == 0) continue;
      if (!in_domain(x, y)) {
        throw Error(ErrorCode::InvalidArgument, "marker pixel lies outside the flood domain");
      }
      out(x, y) = l;
      queue.emplace(field(x, y), seq++, out.index(x, y));
    }
  }

  const auto width = static_cast<std::size_t>(out.width());
  while (!queue.empty()) {
    const auto [value, order, i] = queue.top();
    queue.pop();
    const int px = static_cast<int>(i % width);
    const int py = static_cast<int>(i / width);
    const auto label = out[i];
    detail::for_each_neighbour(connectivity, px, py, [&](int nx, int ny) {
      if (!out.contains(nx, ny) || !in_domain(nx, ny) || out(nx, ny) != 0) return;
      out(nx, ny) = label;
      queue.emplace(field(nx, ny), seq++, out.index(nx, ny));
    });
  }
  return out;
}

namespace detail {

// Geodesic reconstruction by erosion of `marker` above `mask` inside `domain`,
// using alternating raster / anti-raster sweeps until stable.
inline ScalarField reconstruct_by_erosion(ScalarField marker, const ScalarField& mask,
                                          const BinaryMask& domain, int connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  // Causal neighbours for a forward sweep; negate for the backward one.
  std::vector<std::array<int, 2>> causal{{-1, 0}, {0, -1}};
  if (connectivity == 8) {
    causal.push_back({-1, -1});
    causal.push_back({1, -1});
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      const int sign = pass == 0 ? 1 : -1;
      for (int yi = 0; yi < h; ++yi) {
        const int y = pass == 0 ? yi : h - 1 - yi;
        for (int xi = 0; xi < w; ++xi) {
          const int x = pass == 0 ? xi : w - 1 - xi;
          if (!domain(x, y)) continue;
          double best = marker(x, y);
          for (auto [dx, dy] : causal) {
            const int nx = x + sign * dx;
            const int ny = y + sign * dy;
            if (domain.contains(nx, ny) && domain(nx, ny)) best = std::min(best, marker(nx, ny));
          }
          best = std::max(best, mask(x, y));
          if (best != marker(x, y)) {
            marker(x, y) = best;
            changed = true;
          }
        }
      }
    }
  }
  return marker;
}

// Connected plateaus inside `domain` with no strictly lower domain neighbour.
inline LabelMap regional_minima(const ScalarField& field, const BinaryMask& domain,
                                int connectivity) {
  LabelMap visited(field.width(), field.height(), 0);
  LabelMap out(field.width(), field.height(), 0);
  std::int32_t next = 0;
  std::int32_t plateau_id = 0;
  std::vector<std::size_t> members;
  std::deque<std::size_t> queue;
  const auto width = static_cast<std::size_t>(field.width());

  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      if (!domain(x, y) || visited(x, y)) continue;
      ++plateau_id;
      const double level = field(x, y);
      bool is_minimum = true;
      members.clear();
      visited(x, y) = plateau_id;
      queue.push_back(field.index(x, y));
      while (!queue.empty()) {
        const auto i = queue.front();
        queue.pop_front();
        members.push_back(i);
        const int px = static_cast<int>(i % width);
        const int py = static_cast<int>(i / width);
        for_each_neighbour(connectivity, px, py, [&](int nx, int ny) {
          if (!domain.contains(nx, ny) || !domain(nx, ny)) return;
          const double v = field(nx, ny);
          if (v < level) {
            is_minimum = false;
          } else if (v == level && visited(nx, ny) == 0) {
            visited(nx, ny) = plateau_id;
            queue.push_back(field.index(nx, ny));
          }
        });
      }
      if (is_minimum) {
        ++next;
        for (auto i : members) out[i] = next;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Watershed seeds: regional minima of `field` within `domain` after
/// suppressing minima shallower than `h` (h-minima transform).
inline LabelMap find_markers(const ScalarField& field, const BinaryMask& domain, double h = 1.0,
                             int connectivity = 8) {
  require_same_shape(field, domain, "find_markers");
  detail::check_connectivity(connectivity);
  detail::check_finite(field);
  if (!(h >= 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidArgument, "h must be a finite non-negative number");
  }
  if (count_foreground(domain) == 0) {
    throw Error(ErrorCode::EmptyDomain, "marker domain is empty");
  }
  ScalarField raised = field;
  if (h > 0.0) {
    for (auto& v : raised) v += h;
    raised = detail::reconstruct_by_erosion(std::move(raised), field, domain, connectivity);
  }
  return detail::regional_minima(raised, domain, connectivity);
}

/// Negated distance transform: the surface flooded to split touching blobs.
inline ScalarField negated(ScalarField field) {
  for (auto& v : field) v = -v;
  return field;
}

}  // namespace mammoseg
