#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vloop {

/// Ink coverage of one line of text, cropped to the tight ink box.
struct TextRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> ink;  // row-major, 1 = ink

  bool at(int x, int y) const noexcept { return ink[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// Rasterizes `text` in the bundled sans face (Hershey simplex) so that a
/// capital letter is about `pixel_height` pixels tall.
TextRaster rasterize_text(std::string_view text, int pixel_height);

}  // namespace vloop
