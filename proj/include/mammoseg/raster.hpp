#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mammoseg/error.hpp"

namespace mammoseg {

/// Row-major 2-D raster. `Tag` keeps rasters that share a pixel type
/// (grayscale images and binary masks) from converting into each other.
template <typename T, typename Tag>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw Error(ErrorCode::InvalidArgument, "raster data length must equal width*height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }
  template <typename U, typename OtherTag>
  bool same_shape(const Raster<U, OtherTag>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct GrayTag;
struct MaskTag;
struct LabelTag;
struct FieldTag;

/// 8-bit grayscale image.
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// Binary mask: 1 = foreground, 0 = background.
using BinaryMask = Raster<std::uint8_t, MaskTag>;
/// Region labels, 0 = background/unassigned.
using LabelMap = Raster<std::int32_t, LabelTag>;
using ScalarField = Raster<double, FieldTag>;

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": raster shapes differ");
  }
}

inline std::size_t count_foreground(const BinaryMask& mask) {
  std::size_t n = 0;
  for (auto v : mask) n += v != 0;
  return n;
}

inline BinaryMask complement(const BinaryMask& mask) {
  BinaryMask out = mask;
  for (auto& v : out) v = v ? 0 : 1;
  return out;
}

/// Mask pixels carrying label `id`.
inline BinaryMask mask_of_label(const LabelMap& labels, std::int32_t id) {
  BinaryMask out(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] == id ? 1 : 0;
  return out;
}

/// Foreground wherever any positive label is present.
inline BinaryMask mask_of_labels(const LabelMap& labels) {
  BinaryMask out(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] > 0 ? 1 : 0;
  return out;
}

/// 0/255 rendering used when a mask is written as PGM.
inline GrayImage to_gray(const BinaryMask& mask) {
  GrayImage out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 255 : 0;
  return out;
}

}  // namespace mammoseg
