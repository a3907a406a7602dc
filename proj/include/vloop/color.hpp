#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vloop/image.hpp"

namespace vloop {

/// Hexcone HSV. Hue in degrees [0, 360); saturation and value in [0, 1].
/// Achromatic colors carry h = 0.
struct ColorHSV {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

ColorHSV rgb_to_hsv(Rgb c) noexcept;
Rgb hsv_to_rgb(const ColorHSV& c) noexcept;

/// Rec. 601 luma, 0..255.
constexpr double luma(Rgb c) noexcept { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

/// Case-insensitive color word lookup backed by web color values.
class ColorNameTable {
 public:
  ColorNameTable();
  explicit ColorNameTable(std::map<std::string, Rgb> entries);

  std::optional<Rgb> find(std::string_view name) const;
  /// Throws UnknownColorName.
  Rgb resolve(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Rgb> entries_;
};

}  // namespace vloop
