#pragma once

#include <cstdint>
#include <vector>

#include "vloop/image.hpp"

namespace vloop {

/// Boolean region for one object. Bounding box and centroid are derived on
/// construction; an empty bitmap is rejected with EmptyMask.
class MaskRegion {
 public:
  MaskRegion(int object_index, int width, int height, std::vector<std::uint8_t> bits);

  int object_index() const noexcept { return index_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_ &&
           bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  const Box& bbox() const noexcept { return bbox_; }
  /// Mean member coordinate rounded to the nearest pixel.
  Point centroid() const noexcept { return centroid_; }
  std::size_t area() const noexcept { return area_; }
  bool covers_everything() const noexcept {
    return area_ == static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  friend bool operator==(const MaskRegion&, const MaskRegion&) = default;

 private:
  int index_;
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
  Box bbox_;
  Point centroid_;
  std::size_t area_ = 0;
};

/// Throws UnknownObjectIndex when `index` has no pixels in `map`.
MaskRegion mask_from_label(const LabelMap& map, int index);

/// Dilation by a Euclidean disc: a pixel joins when some member lies at
/// distance <= radius. Radius 1 therefore yields the 4-neighbour plus shape.
MaskRegion dilate_mask(const MaskRegion& mask, int radius);

}  // namespace vloop
