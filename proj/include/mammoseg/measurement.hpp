#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mammoseg/components.hpp"
#include "mammoseg/error.hpp"
#include "mammoseg/raster.hpp"

namespace mammoseg {

/// Centimetres per pixel: the operator-supplied multiplication factor.
class Calibration {
 public:
  explicit Calibration(double cm_per_pixel) : cm_per_pixel_(cm_per_pixel) {
    if (!std::isfinite(cm_per_pixel) || cm_per_pixel <= 0.0) {
      throw Error(ErrorCode::InvalidCalibration, "cm_per_pixel must be positive and finite",
                  "cm_per_pixel");
    }
  }
  double cm_per_pixel() const noexcept { return cm_per_pixel_; }
  friend bool operator==(const Calibration&, const Calibration&) = default;

 private:
  double cm_per_pixel_;
};

struct PointF {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PointF&, const PointF&) = default;
};

struct PixelLine {
  PointF p1;
  PointF p2;

  /// Endpoints may sit up to half a pixel outside the image.
  bool fits(int width, int height) const {
    const auto ok = [&](PointF p) {
      return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= -0.5 && p.y >= -0.5 &&
             p.x <= width - 0.5 && p.y <= height - 0.5;
    };
    return ok(p1) && ok(p2);
  }
  friend bool operator==(const PixelLine&, const PixelLine&) = default;
};

enum class MeasureMethod { Auto, Manual };

inline std::string_view to_string(MeasureMethod m) {
  return m == MeasureMethod::Auto ? "auto" : "manual";
}

inline std::optional<MeasureMethod> parse_measure_method(std::string_view s) {
  if (s == "auto") return MeasureMethod::Auto;
  if (s == "manual") return MeasureMethod::Manual;
  return std::nullopt;
}

struct DiameterMeasurement {
  double pixels = 0.0;
  double cm = 0.0;
  MeasureMethod method = MeasureMethod::Auto;
  std::int64_t component_area_px = 0;  // auto only

  /// Derived on demand, never stored.
  double meters() const { return cm / 100.0; }
  friend bool operator==(const DiameterMeasurement&, const DiameterMeasurement&) = default;
};

inline double pixels_to_cm(double pixels, const Calibration& cal) {
  if (!std::isfinite(pixels) || pixels < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "pixel distance must be finite and non-negative");
  }
  return pixels * cal.cm_per_pixel();
}

/// Largest component with area >= min_area; ties go to the smallest label.
/// An empty result means no lump.
inline std::optional<std::int32_t> select_tumor_component(const std::vector<RegionStats>& stats,
                                                          std::int64_t min_area = 5) {
  std::optional<std::int32_t> best;
  std::int64_t best_area = 0;
  for (const auto& s : stats) {
    if (s.area < min_area) continue;
    if (!best || s.area > best_area || (s.area == best_area && s.label < *best)) {
      best = s.label;
      best_area = s.area;
    }
  }
  return best;
}

namespace detail {

struct IPoint {
  std::int64_t x;
  std::int64_t y;
  friend auto operator<=>(const IPoint&, const IPoint&) = default;
};

inline std::int64_t cross(IPoint o, IPoint a, IPoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; collinear points dropped.
inline std::vector<IPoint> convex_hull(std::vector<IPoint> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<IPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace detail

/// Maximum Feret (caliper) diameter over pixel centres of the foreground.
inline double feret_diameter(const BinaryMask& component) {
  std::vector<detail::IPoint> boundary;
  for (int y = 0; y < component.height(); ++y) {
    for (int x = 0; x < component.width(); ++x) {
      if (!component(x, y)) continue;
      const bool interior = component.contains(x - 1, y) && component(x - 1, y) &&
                            component.contains(x + 1, y) && component(x + 1, y) &&
                            component.contains(x, y - 1) && component(x, y - 1) &&
                            component.contains(x, y + 1) && component(x, y + 1);
      if (!interior) boundary.push_back({x, y});
    }
  }
  if (boundary.empty()) throw Error(ErrorCode::EmptyComponent, "component has no pixels");

  const auto hull = detail::convex_hull(std::move(boundary));
  std::int64_t best = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      const auto dx = hull[i].x - hull[j].x;
      const auto dy = hull[i].y - hull[j].y;
      best = std::max(best, dx * dx + dy * dy);
    }
  }
  return std::sqrt(static_cast<double>(best));
}

inline double manual_distance(const PixelLine& line) {
  return std::hypot(line.p2.x - line.p1.x, line.p2.y - line.p1.y);
}

inline DiameterMeasurement measure_manual(const PixelLine& line, const Calibration& cal) {
  const double px = manual_distance(line);
  return {px, pixels_to_cm(px, cal), MeasureMethod::Manual, 0};
}

struct AutoDiameter {
  double pixels = 0.0;
  std::int64_t area = 0;
  std::optional<std::int32_t> label;  // empty when no component qualifies
};

inline AutoDiameter auto_diameter(const Components& components, std::int64_t min_area = 5) {
  const auto id = select_tumor_component(components.regions, min_area);
  if (!id) return {};
  return {feret_diameter(mask_of_label(components.labels, *id)),
          components.regions[static_cast<std::size_t>(*id - 1)].area, id};
}

/// Automatic measurement of the selected component; zero (healthy) when no
/// component qualifies.
inline DiameterMeasurement measure_auto(const Components& components, const Calibration& cal,
                                        std::int64_t min_area = 5) {
  const auto d = auto_diameter(components, min_area);
  return {d.pixels, pixels_to_cm(d.pixels, cal), MeasureMethod::Auto, d.area};
}

}  // namespace mammoseg
