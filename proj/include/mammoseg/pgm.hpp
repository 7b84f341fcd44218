#pragma once

#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mammoseg/error.hpp"
#include "mammoseg/raster.hpp"

namespace mammoseg {

namespace detail {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (is_space(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Header fields must be separated from what precedes them by whitespace.
  unsigned long read_number(const char* what) {
    const std::size_t before = pos_;
    skip_whitespace_and_comments();
    if (pos_ == before) {
      throw Error(ErrorCode::BadHeader, std::string("expected whitespace before ") + what);
    }
    unsigned long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000UL) {
        throw Error(ErrorCode::BadHeader, std::string(what) + " is too large");
      }
      ++pos_;
      ++digits;
    }
    if (digits == 0) {
      throw Error(ErrorCode::BadHeader, std::string(what) + " is not a number");
    }
    return value;
  }

  void expect_single_whitespace() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      throw Error(ErrorCode::BadHeader, "expected a single whitespace byte after maxval");
    }
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Decode a binary PGM ("P5", maxval <= 255).
inline GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::BadMagic, "not a binary PGM (expected \"P5\")");
  }
  detail::PgmHeaderReader reader(bytes);
  reader.advance(2);
  const auto width = reader.read_number("width");
  const auto height = reader.read_number("height");
  const auto maxval = reader.read_number("maxval");
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::BadHeader, "image dimensions must be positive");
  }
  if (maxval == 0 || maxval > 255) {
    throw Error(ErrorCode::BadHeader, "maxval must be in [1,255]");
  }
  if (width * height > (1UL << 30)) {
    throw Error(ErrorCode::BadHeader, "image is too large");
  }
  reader.expect_single_whitespace();

  const std::size_t count = width * height;
  const std::size_t start = reader.position();
  if (bytes.size() - start < count) {
    throw Error(ErrorCode::TruncatedRaster,
                "raster has " + std::to_string(bytes.size() - start) + " bytes, expected " +
                    std::to_string(count));
  }
  std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(start + count));
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

inline GrayImage read_pgm(std::string_view bytes) {
  return read_pgm(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

/// Canonical encoding: "P5\n<w> <h>\n255\n" followed by the raster.
inline std::string write_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (auto v : image) out.push_back(static_cast<char>(v));
  return out;
}

inline std::string write_pgm(const BinaryMask& mask) { return write_pgm(to_gray(mask)); }

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::InvalidArgument, "short write to " + path);
}

inline GrayImage load_pgm(const std::string& path) { return read_pgm(read_file_bytes(path)); }

}  // namespace mammoseg
