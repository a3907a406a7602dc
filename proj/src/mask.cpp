#include "vloop/mask.hpp"

#include <algorithm>
#include <cmath>

#include "vloop/error.hpp"

namespace vloop {

MaskRegion::MaskRegion(int object_index, int width, int height, std::vector<std::uint8_t> bits)
    : index_(object_index), width_(width), height_(height), bits_(std::move(bits)) {
  if (width_ < 1 || height_ < 1 || bits_.size() != static_cast<std::size_t>(width_) * height_) {
    throw Error(ErrorKind::DimensionMismatch, "mask bitmap does not match its dimensions");
  }
  Box box{width_, height_, -1, -1};
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      auto& bit = bits_[static_cast<std::size_t>(y) * width_ + x];
      if (!bit) continue;
      bit = 1;
      ++area_;
      sum_x += x;
      sum_y += y;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x);
      box.y1 = std::max(box.y1, y);
    }
  }
  if (area_ == 0) {
    throw Error(ErrorKind::EmptyMask, "mask for object " + std::to_string(index_) + " is empty");
  }
  bbox_ = box;
  centroid_ = {static_cast<int>(std::lround(sum_x / static_cast<double>(area_))),
               static_cast<int>(std::lround(sum_y / static_cast<double>(area_)))};
}

MaskRegion mask_from_label(const LabelMap& map, int index) {
  std::vector<std::uint8_t> bits(map.labels().size(), 0);
  bool any = false;
  if (index > 0 && index <= 65535) {
    const auto want = static_cast<std::uint16_t>(index);
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (map.labels()[i] == want) {
        bits[i] = 1;
        any = true;
      }
    }
  }
  if (!any) {
    throw Error(ErrorKind::UnknownObjectIndex, "object " + std::to_string(index) + " is not in the label map");
  }
  return MaskRegion(index, map.width(), map.height(), std::move(bits));
}

MaskRegion dilate_mask(const MaskRegion& mask, int radius) {
  if (radius < 0) throw Error(ErrorKind::InvalidArgument, "dilation radius must be non-negative");
  if (radius == 0) return mask;

  std::vector<Point> disc;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) disc.push_back({dx, dy});
    }
  }
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> out(mask.bits());
  const Box& b = mask.bbox();
  for (int y = b.y0; y <= b.y1; ++y) {
    for (int x = b.x0; x <= b.x1; ++x) {
      if (!mask.contains(x, y)) continue;
      // Stepping from an interior pixel toward any target reaches a boundary
      // pixel that is strictly closer, so boundary stamps suffice.
      if (mask.contains(x - 1, y) && mask.contains(x + 1, y) && mask.contains(x, y - 1) &&
          mask.contains(x, y + 1)) {
        continue;
      }
      for (const auto& d : disc) {
        const int nx = x + d.x;
        const int ny = y + d.y;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        out[static_cast<std::size_t>(ny) * w + nx] = 1;
      }
    }
  }
  return MaskRegion(mask.object_index(), w, h, std::move(out));
}

}  // namespace vloop
