#include "vloop/som.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "vloop/color.hpp"
#include "vloop/error.hpp"
#include "vloop/mask.hpp"
#include "vloop/text_raster.hpp"

namespace vloop {
namespace {

constexpr std::array<Rgb, 8> kPalette{{
    {255, 0, 255}, {0, 255, 255}, {255, 255, 0}, {0, 255, 0},
    {255, 96, 0}, {0, 128, 255}, {255, 0, 96}, {160, 255, 0},
}};

Rgb stroke_color(int index) { return kPalette[static_cast<std::size_t>(index - 1) % kPalette.size()]; }

}  // namespace

int som_badge_side(int width, int height) noexcept {
  const int min_dim = std::min(width, height);
  const int side = std::max(12, static_cast<int>(std::lround(0.03 * min_dim)));
  return std::min(side, min_dim);
}

std::vector<SomBadge> layout_som_badges(const ImageBuffer& image, const LabelMap& map) {
  if (image.width() != map.width() || image.height() != map.height()) {
    throw Error(ErrorKind::DimensionMismatch, "label map and image sizes differ");
  }
  const int w = map.width();
  const int h = map.height();
  const int side = som_badge_side(w, h);
  std::vector<SomBadge> badges;
  for (int index : map.indices()) {
    const Point c = mask_from_label(map, index).centroid();
    const int x0 = std::clamp(c.x - side / 2, 0, w - side);
    const int y0 = std::clamp(c.y - side / 2, 0, h - side);
    const Box rect{x0, y0, x0 + side - 1, y0 + side - 1};
    double sum = 0.0;
    for (int y = rect.y0; y <= rect.y1; ++y) {
      for (int x = rect.x0; x <= rect.x1; ++x) sum += luma(image.at(x, y));
    }
    const double mean = sum / (static_cast<double>(side) * side);
    badges.push_back({index, rect, mean < 128.0});
  }
  return badges;
}

ImageBuffer render_som_overlay(const ImageBuffer& image, const LabelMap& map) {
  if (image.width() != map.width() || image.height() != map.height()) {
    throw Error(ErrorKind::DimensionMismatch, "label map and image sizes differ");
  }
  const auto indices = map.indices();
  if (indices.empty()) return image;

  const int w = image.width();
  const int h = image.height();
  auto px = image.copy_pixels();
  auto label = [&](int x, int y) { return map.at(x, y); };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto l = label(x, y);
      if (l == 0) continue;
      const bool edge = (x > 0 && label(x - 1, y) != l) || (x + 1 < w && label(x + 1, y) != l) ||
                        (y > 0 && label(x, y - 1) != l) || (y + 1 < h && label(x, y + 1) != l);
      if (edge) px[static_cast<std::size_t>(y) * w + x] = stroke_color(l);
    }
  }

  for (const auto& badge : layout_som_badges(image, map)) {
    const Rgb fill = badge.light_fill ? Rgb{255, 255, 255} : Rgb{0, 0, 0};
    const Rgb ink = badge.light_fill ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
    for (int y = badge.rect.y0; y <= badge.rect.y1; ++y) {
      for (int x = badge.rect.x0; x <= badge.rect.x1; ++x) px[static_cast<std::size_t>(y) * w + x] = fill;
    }
    const std::string digits = std::to_string(badge.index);
    const int side = badge.rect.width();
    int glyph_h = std::max(4, side * 6 / 10);
    TextRaster raster = rasterize_text(digits, glyph_h);
    while ((raster.width > side - 2 || raster.height > side - 2) && glyph_h > 4) {
      raster = rasterize_text(digits, --glyph_h);
    }
    const int ox = badge.rect.x0 + (side - raster.width) / 2;
    const int oy = badge.rect.y0 + (side - raster.height) / 2;
    for (int y = 0; y < raster.height; ++y) {
      for (int x = 0; x < raster.width; ++x) {
        const int tx = ox + x;
        const int ty = oy + y;
        if (raster.at(x, y) && badge.rect.contains(tx, ty)) px[static_cast<std::size_t>(ty) * w + tx] = ink;
      }
    }
  }
  return ImageBuffer(w, h, std::move(px));
}

}  // namespace vloop
