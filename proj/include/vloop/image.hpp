#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vloop {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

struct Point {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(const Point&, const Point&) = default;
};

/// Inclusive pixel rectangle.
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  constexpr int width() const noexcept { return x1 - x0 + 1; }
  constexpr int height() const noexcept { return y1 - y0 + 1; }
  constexpr bool empty() const noexcept { return x1 < x0 || y1 < y0; }
  constexpr bool contains(int x, int y) const noexcept {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
  constexpr Box inflated(int by) const noexcept { return {x0 - by, y0 - by, x1 + by, y1 + by}; }
  friend constexpr bool operator==(const Box&, const Box&) = default;
};

/// Immutable 8-bit RGB raster. Every edit produces a new buffer.
class ImageBuffer {
 public:
  ImageBuffer(int width, int height, std::vector<Rgb> pixels);
  static ImageBuffer filled(int width, int height, Rgb color);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const Rgb> pixels() const noexcept { return pixels_; }
  const Rgb& at(int x, int y) const noexcept { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  bool same_size(const ImageBuffer& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Copy of the pixel array, the usual starting point for producing a new buffer.
  std::vector<Rgb> copy_pixels() const { return pixels_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

using ImageRef = std::shared_ptr<const ImageBuffer>;

/// Row-major object-index raster; 0 means unlabeled.
class LabelMap {
 public:
  LabelMap(int width, int height, std::vector<std::uint16_t> labels);
  static LabelMap empty(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const std::uint16_t> labels() const noexcept { return labels_; }
  std::uint16_t at(int x, int y) const noexcept { return labels_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Sorted distinct nonzero labels.
  std::vector<int> indices() const;
  bool contains_index(int index) const;
  std::size_t support() const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint16_t> labels_;
};

/// Hex SHA-256 of the dimensions and raw RGB bytes.
std::string digest(const ImageBuffer& image);
std::string digest(const LabelMap& map);

}  // namespace vloop
