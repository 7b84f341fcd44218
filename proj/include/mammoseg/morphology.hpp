#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "mammoseg/error.hpp"
#include "mammoseg/raster.hpp"

namespace mammoseg {

struct Offset {
  int dy = 0;
  int dx = 0;
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

/// Set of (dy, dx) offsets that always contains the origin.
class StructuringElement {
 public:
  explicit StructuringElement(std::vector<Offset> offsets) : offsets_(std::move(offsets)) {
    std::sort(offsets_.begin(), offsets_.end());
    offsets_.erase(std::unique(offsets_.begin(), offsets_.end()), offsets_.end());
    if (!std::binary_search(offsets_.begin(), offsets_.end(), Offset{0, 0})) {
      throw Error(ErrorCode::InvalidArgument, "structuring element must contain the origin");
    }
  }

  static StructuringElement square(int radius) {
    std::vector<Offset> v;
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx) v.push_back({dy, dx});
    return StructuringElement(std::move(v));
  }

  static StructuringElement cross(int radius) {
    std::vector<Offset> v{{0, 0}};
    for (int d = 1; d <= radius; ++d) {
      v.push_back({-d, 0});
      v.push_back({d, 0});
      v.push_back({0, -d});
      v.push_back({0, d});
    }
    return StructuringElement(std::move(v));
  }

  static StructuringElement disk(int radius) {
    std::vector<Offset> v;
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx)
        if (dy * dy + dx * dx <= radius * radius) v.push_back({dy, dx});
    return StructuringElement(std::move(v));
  }

  /// "square3" (default), "square5", "cross3", "cross5", "disk<r>".
  static StructuringElement from_name(std::string_view name) {
    if (name == "square3") return square(1);
    if (name == "square5") return square(2);
    if (name == "cross3") return cross(1);
    if (name == "cross5") return cross(2);
    if (name.starts_with("disk") && name.size() > 4) {
      int r = 0;
      for (char c : name.substr(4)) {
        if (c < '0' || c > '9') r = -1;
        if (r < 0) break;
        r = r * 10 + (c - '0');
        if (r > 64) break;
      }
      if (r >= 1 && r <= 64) return disk(r);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown structuring element '" + std::string(name) + "'");
  }

  StructuringElement reflected() const {
    std::vector<Offset> v;
    v.reserve(offsets_.size());
    for (auto o : offsets_) v.push_back({-o.dy, -o.dx});
    return StructuringElement(std::move(v));
  }

  /// Largest |dy| or |dx|.
  int radius() const {
    int r = 0;
    for (auto o : offsets_) r = std::max({r, std::abs(o.dy), std::abs(o.dx)});
    return r;
  }

  const std::vector<Offset>& offsets() const noexcept { return offsets_; }

  friend bool operator==(const StructuringElement&, const StructuringElement&) = default;

 private:
  std::vector<Offset> offsets_;
};

/// What pixels outside the image are taken to be.
enum class Border { Background, Foreground };

inline Border flip(Border b) {
  return b == Border::Background ? Border::Foreground : Border::Background;
}

/// Output is foreground iff every offset lands on foreground.
inline BinaryMask erode(const BinaryMask& mask, const StructuringElement& se,
                        Border outside = Border::Background) {
  const bool outside_fg = outside == Border::Foreground;
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      bool all = true;
      for (auto o : se.offsets()) {
        const int xx = x + o.dx;
        const int yy = y + o.dy;
        const bool v = mask.contains(xx, yy) ? mask(xx, yy) != 0 : outside_fg;
        if (!v) {
          all = false;
          break;
        }
      }
      out(x, y) = all ? 1 : 0;
    }
  }
  return out;
}

/// Output is foreground iff some reflected offset lands on foreground.
/// With the default border, growth is clipped at the image edge.
inline BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se,
                         Border outside = Border::Background) {
  const bool outside_fg = outside == Border::Foreground;
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      bool any = false;
      for (auto o : se.offsets()) {
        const int xx = x - o.dx;
        const int yy = y - o.dy;
        const bool v = mask.contains(xx, yy) ? mask(xx, yy) != 0 : outside_fg;
        if (v) {
          any = true;
          break;
        }
      }
      out(x, y) = any ? 1 : 0;
    }
  }
  return out;
}

inline BinaryMask pad(const BinaryMask& mask, int margin, std::uint8_t fill = 0) {
  BinaryMask out(mask.width() + 2 * margin, mask.height() + 2 * margin, fill);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out(x + margin, y + margin) = mask(x, y);
  return out;
}

inline BinaryMask crop(const BinaryMask& mask, int x0, int y0, int width, int height) {
  BinaryMask out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(x, y) = mask(x + x0, y + y0);
  return out;
}

/// Erosion then dilation. Removes foreground that no translate of `se` fits in.
inline BinaryMask opening(const BinaryMask& mask, const StructuringElement& se) {
  return dilate(erode(mask, se), se);
}

/// Dilation then erosion, evaluated as if the image continued with background
/// on all sides: the intermediate dilation is not clipped at the image edge,
/// so closing never removes foreground that touches the border.
inline BinaryMask closing(const BinaryMask& mask, const StructuringElement& se) {
  const int margin = std::max(1, se.radius());
  const BinaryMask grown = dilate(pad(mask, margin), se);
  return crop(erode(grown, se), margin, margin, mask.width(), mask.height());
}

}  // namespace mammoseg
