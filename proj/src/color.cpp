#include "vloop/color.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "vloop/error.hpp"

namespace vloop {

ColorHSV rgb_to_hsv(Rgb c) noexcept {
  const double r = c.r / 255.0;
  const double g = c.g / 255.0;
  const double b = c.b / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;

  ColorHSV out;
  out.v = mx;
  out.s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    out.h = 0.0;
    out.s = 0.0;
    return out;
  }
  double h;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / d, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

Rgb hsv_to_rgb(const ColorHSV& c) noexcept {
  const double s = std::clamp(c.s, 0.0, 1.0);
  const double v = std::clamp(c.v, 0.0, 1.0);
  double h = std::fmod(c.h, 360.0);
  if (h < 0.0) h += 360.0;

  const double chroma = v * s;
  const double hp = h / 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r1 = 0, g1 = 0, b1 = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r1 = chroma; g1 = x; break;
    case 1: r1 = x; g1 = chroma; break;
    case 2: g1 = chroma; b1 = x; break;
    case 3: g1 = x; b1 = chroma; break;
    case 4: r1 = x; b1 = chroma; break;
    default: r1 = chroma; b1 = x; break;
  }
  const double m = v - chroma;
  auto to8 = [](double f) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(f * 255.0), 0L, 255L));
  };
  return {to8(r1 + m), to8(g1 + m), to8(b1 + m)};
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

}  // namespace

ColorNameTable::ColorNameTable()
    : entries_{
          {"red", {255, 0, 0}},       {"orange", {255, 165, 0}},  {"yellow", {255, 255, 0}},
          {"green", {0, 128, 0}},     {"lime", {0, 255, 0}},      {"teal", {0, 128, 128}},
          {"cyan", {0, 255, 255}},    {"blue", {0, 0, 255}},      {"navy", {0, 0, 128}},
          {"purple", {128, 0, 128}},  {"violet", {238, 130, 238}}, {"magenta", {255, 0, 255}},
          {"pink", {255, 192, 203}},  {"brown", {165, 42, 42}},   {"maroon", {128, 0, 0}},
          {"gold", {255, 215, 0}},    {"black", {0, 0, 0}},       {"white", {255, 255, 255}},
          {"gray", {128, 128, 128}},  {"grey", {128, 128, 128}},  {"silver", {192, 192, 192}},
      } {}

ColorNameTable::ColorNameTable(std::map<std::string, Rgb> entries) {
  for (auto& [name, rgb] : entries) entries_.emplace(lower(name), rgb);
}

std::optional<Rgb> ColorNameTable::find(std::string_view name) const {
  auto it = entries_.find(lower(name));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Rgb ColorNameTable::resolve(std::string_view name) const {
  if (auto c = find(name)) return *c;
  throw Error(ErrorKind::UnknownColorName, "unknown color name: " + std::string(name));
}

std::vector<std::string> ColorNameTable::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

}  // namespace vloop
