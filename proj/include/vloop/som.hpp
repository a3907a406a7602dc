#pragma once

#include <vector>

#include "vloop/image.hpp"

namespace vloop {

struct SomBadge {
  int index = 0;
  Box rect;
  bool light_fill = true;  // white badge with dark digits
};

int som_badge_side(int width, int height) noexcept;

/// Badge placement for every object in `map`, in index order.
std::vector<SomBadge> layout_som_badges(const ImageBuffer& image, const LabelMap& map);

/// Set-of-Mark overlay: object boundaries traced in a per-index palette color
/// and a numbered badge near each centroid. Returns a new buffer.
ImageBuffer render_som_overlay(const ImageBuffer& image, const LabelMap& map);

}  // namespace vloop
