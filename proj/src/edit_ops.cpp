#include "vloop/edit_ops.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <deque>

#include "vloop/error.hpp"
#include "vloop/text_raster.hpp"

namespace vloop {
namespace {

void require_same_size(const ImageBuffer& image, const MaskRegion& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorKind::DimensionMismatch, "mask and image sizes differ");
  }
}

int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

std::uint8_t to_u8(double v) noexcept {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

// --- anchors and action names -------------------------------------------------

std::string to_string(const Anchor& anchor) {
  static constexpr std::array<std::string_view, 3> kV{"top", "center", "bottom"};
  static constexpr std::array<std::string_view, 3> kH{"left", "center", "right"};
  if (anchor.horizontal == HAlign::Center && anchor.vertical == VAlign::Center) return "center";
  return std::string(kV[static_cast<int>(anchor.vertical)]) + "-" +
         std::string(kH[static_cast<int>(anchor.horizontal)]);
}

std::optional<Anchor> anchor_from_string(std::string_view text) {
  std::string s(trim(text));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  std::replace(s.begin(), s.end(), ' ', '-');
  if (s == "center" || s == "middle" || s == "center-center") return Anchor{};
  const auto dash = s.find('-');
  if (dash == std::string::npos) return std::nullopt;
  const std::string a = s.substr(0, dash);
  const std::string b = s.substr(dash + 1);
  auto vertical = [](const std::string& w) -> std::optional<VAlign> {
    if (w == "top") return VAlign::Top;
    if (w == "bottom") return VAlign::Bottom;
    if (w == "center" || w == "middle") return VAlign::Center;
    return std::nullopt;
  };
  auto horizontal = [](const std::string& w) -> std::optional<HAlign> {
    if (w == "left") return HAlign::Left;
    if (w == "right") return HAlign::Right;
    if (w == "center" || w == "middle") return HAlign::Center;
    return std::nullopt;
  };
  if (auto v = vertical(a); v && horizontal(b)) return Anchor{*horizontal(b), *v};
  if (auto h = horizontal(a); h && vertical(b)) return Anchor{*h, *vertical(b)};
  return std::nullopt;
}

std::string_view to_string(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::Blur: return "Blur";
    case ActionKind::Remove: return "Remove";
    case ActionKind::ChangeColor: return "ChangeColor";
    case ActionKind::AdjustBrightness: return "AdjustBrightness";
    case ActionKind::AddText: return "AddText";
  }
  return "Unknown";
}

std::optional<ActionKind> action_kind_from_string(std::string_view name) {
  for (auto k : {ActionKind::Blur, ActionKind::Remove, ActionKind::ChangeColor, ActionKind::AdjustBrightness,
                 ActionKind::AddText}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

// --- blur -----------------------------------------------------------------------

double blur_sigma(const MaskRegion& mask, const EditConfig& config) noexcept {
  const double extent = std::max(mask.bbox().width(), mask.bbox().height());
  return std::max(config.blur_sigma_min, extent / config.blur_sigma_divisor);
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double t = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = t;
    sum += t;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

ImageBuffer blur_object(const ImageBuffer& image, const MaskRegion& mask, const EditConfig& config) {
  require_same_size(image, mask);
  const auto taps = gaussian_kernel(blur_sigma(mask, config));
  const int radius = static_cast<int>(taps.size() / 2);
  const int w = image.width();
  const int h = image.height();
  const Box& box = mask.bbox();
  const int bw = box.width();

  // Horizontal pass restricted to the mask's columns, over every row the
  // vertical pass will read.
  std::vector<std::uint8_t> row_needed(static_cast<std::size_t>(h), 0);
  for (int y = box.y0 - radius; y <= box.y1 + radius; ++y) row_needed[static_cast<std::size_t>(reflect101(y, h))] = 1;

  std::vector<std::array<double, 3>> horiz(static_cast<std::size_t>(h) * bw);
  for (int y = 0; y < h; ++y) {
    if (!row_needed[static_cast<std::size_t>(y)]) continue;
    for (int x = box.x0; x <= box.x1; ++x) {
      std::array<double, 3> acc{};
      for (int k = -radius; k <= radius; ++k) {
        const Rgb c = image.at(reflect101(x + k, w), y);
        const double t = taps[static_cast<std::size_t>(k + radius)];
        acc[0] += t * c.r;
        acc[1] += t * c.g;
        acc[2] += t * c.b;
      }
      horiz[static_cast<std::size_t>(y) * bw + (x - box.x0)] = acc;
    }
  }

  auto px = image.copy_pixels();
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      if (!mask.contains(x, y)) continue;
      std::array<double, 3> acc{};
      for (int k = -radius; k <= radius; ++k) {
        const auto& src = horiz[static_cast<std::size_t>(reflect101(y + k, h)) * bw + (x - box.x0)];
        const double t = taps[static_cast<std::size_t>(k + radius)];
        acc[0] += t * src[0];
        acc[1] += t * src[1];
        acc[2] += t * src[2];
      }
      px[static_cast<std::size_t>(y) * w + x] = {to_u8(acc[0]), to_u8(acc[1]), to_u8(acc[2])};
    }
  }
  return ImageBuffer(w, h, std::move(px));
}

// --- color and brightness -------------------------------------------------------

ImageBuffer change_color(const ImageBuffer& image, const MaskRegion& mask, const ColorHSV& target) {
  require_same_size(image, mask);
  constexpr double kChromaticThreshold = 0.2;
  constexpr double kSaturationFloor = 0.4;
  constexpr double kAchromaticPull = 0.8;
  const bool chromatic = target.s >= kChromaticThreshold;

  auto px = image.copy_pixels();
  const int w = image.width();
  const Box& box = mask.bbox();
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      if (!mask.contains(x, y)) continue;
      auto& p = px[static_cast<std::size_t>(y) * w + x];
      ColorHSV hsv = rgb_to_hsv(p);
      if (chromatic) {
        hsv.h = target.h;
        hsv.s = std::max(hsv.s, kSaturationFloor * target.s);
      } else {
        hsv.h = 0.0;
        hsv.s = 0.0;
        hsv.v += kAchromaticPull * (target.v - hsv.v);
      }
      p = hsv_to_rgb(hsv);
    }
  }
  return ImageBuffer(w, image.height(), std::move(px));
}

ImageBuffer adjust_brightness(const ImageBuffer& image, const MaskRegion& mask, Direction direction,
                              const EditConfig& config) {
  require_same_size(image, mask);
  const int delta = direction == Direction::Brighter ? config.brightness_step : -config.brightness_step;
  auto shift = [delta](std::uint8_t c) { return static_cast<std::uint8_t>(std::clamp(c + delta, 0, 255)); };
  auto px = image.copy_pixels();
  const int w = image.width();
  const Box& box = mask.bbox();
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      if (!mask.contains(x, y)) continue;
      auto& p = px[static_cast<std::size_t>(y) * w + x];
      p = {shift(p.r), shift(p.g), shift(p.b)};
    }
  }
  return ImageBuffer(w, image.height(), std::move(px));
}

// --- removal ----------------------------------------------------------------------

ImageBuffer inpaint_boundary_fill(const ImageBuffer& image, const MaskRegion& fill_region) {
  require_same_size(image, fill_region);
  if (fill_region.covers_everything()) {
    throw Error(ErrorKind::MaskCoversImage, "fill region covers the whole image; nothing to sample");
  }
  const int w = image.width();
  const int h = image.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;

  // Layer 0 is known; layer k holds unknown pixels first touched by layer k-1
  // (8-connectivity). Each pixel averages only strictly earlier layers.
  constexpr int kUnset = -1;
  std::vector<int> layer(n, 0);
  std::deque<Point> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (fill_region.contains(x, y)) layer[static_cast<std::size_t>(y) * w + x] = kUnset;
    }
  }
  const Box box = fill_region.bbox().inflated(1);
  for (int y = std::max(box.y0, 0); y <= std::min(box.y1, h - 1); ++y) {
    for (int x = std::max(box.x0, 0); x <= std::min(box.x1, w - 1); ++x) {
      if (layer[static_cast<std::size_t>(y) * w + x] == 0) queue.push_back({x, y});
    }
  }
  std::vector<Point> order;
  while (!queue.empty()) {
    const Point p = queue.front();
    queue.pop_front();
    const int next = layer[static_cast<std::size_t>(p.y) * w + p.x] + 1;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = p.x + dx;
        const int ny = p.y + dy;
        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        auto& l = layer[static_cast<std::size_t>(ny) * w + nx];
        if (l != kUnset) continue;
        l = next;
        queue.push_back({nx, ny});
        order.push_back({nx, ny});
      }
    }
  }

  std::vector<std::array<double, 3>> value(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Rgb c = image.pixels()[i];
    value[i] = {double(c.r), double(c.g), double(c.b)};
  }
  // `order` is sorted by layer because the BFS visits layers in sequence.
  for (const Point& p : order) {
    const std::size_t idx = static_cast<std::size_t>(p.y) * w + p.x;
    const int own = layer[idx];
    std::array<double, 3> sum{};
    int count = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = p.x + dx;
        const int ny = p.y + dy;
        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (layer[j] >= own) continue;
        for (int c = 0; c < 3; ++c) sum[c] += value[j][c];
        ++count;
      }
    }
    for (int c = 0; c < 3; ++c) value[idx][c] = sum[c] / count;
  }

  auto px = image.copy_pixels();
  for (const Point& p : order) {
    const std::size_t idx = static_cast<std::size_t>(p.y) * w + p.x;
    px[idx] = {to_u8(value[idx][0]), to_u8(value[idx][1]), to_u8(value[idx][2])};
  }
  return ImageBuffer(w, h, std::move(px));
}

MaskRegion removal_region(const MaskRegion& mask, const EditConfig& config) {
  return dilate_mask(mask, config.dilation_radius);
}

ImageBuffer remove_object(const ImageBuffer& image, const MaskRegion& mask, const InpaintStrategy& strategy,
                          const EditConfig& config) {
  require_same_size(image, mask);
  if (mask.covers_everything()) throw Error(ErrorKind::MaskCoversImage, "object mask covers the whole image");
  const MaskRegion region = removal_region(mask, config);
  if (region.covers_everything()) {
    throw Error(ErrorKind::MaskCoversImage, "dilated object mask covers the whole image");
  }
  const ImageBuffer filled = strategy.fill(image, region);
  if (!filled.same_size(image)) throw Error(ErrorKind::MalformedResponse, "inpainting changed the image size");

  // Only the fill region may change, whatever the strategy returned.
  auto px = image.copy_pixels();
  for (int y = region.bbox().y0; y <= region.bbox().y1; ++y) {
    for (int x = region.bbox().x0; x <= region.bbox().x1; ++x) {
      if (region.contains(x, y)) px[static_cast<std::size_t>(y) * image.width() + x] = filled.at(x, y);
    }
  }
  return ImageBuffer(image.width(), image.height(), std::move(px));
}

// --- text ---------------------------------------------------------------------------

Box anchor_cell(int width, int height, const Anchor& anchor, const EditConfig& config) {
  const int margin = static_cast<int>(std::lround(config.text_margin_fraction * std::min(width, height)));
  const int col = static_cast<int>(anchor.horizontal);
  const int row = static_cast<int>(anchor.vertical);
  const int x0 = col * width / 3;
  const int x1 = (col + 1) * width / 3 - 1;
  const int y0 = row * height / 3;
  const int y1 = (row + 1) * height / 3 - 1;
  Box cell{x0 + margin, y0 + margin, x1 - margin, y1 - margin};
  if (cell.empty()) cell = {x0, y0, x1, y1};
  return cell;
}

namespace {

struct FittedText {
  TextRaster raster;
  std::string text;
  int pixel_height = 0;
};

// Shrinks toward the minimum size, then truncates with an ellipsis.
FittedText fit_text(std::string_view text, int max_width, int image_height, const EditConfig& config) {
  const int start = std::max(4, static_cast<int>(std::lround(config.text_size_fraction * image_height)));
  const int floor = std::max(4, static_cast<int>(std::lround(config.text_min_fraction * image_height)));
  int size = start;
  TextRaster raster = rasterize_text(text, size);
  while (raster.width > max_width && size > floor) raster = rasterize_text(text, --size);
  if (raster.width <= max_width) return {std::move(raster), std::string(text), size};

  for (std::size_t keep = text.size(); keep-- > 0;) {
    std::string candidate(trim(text.substr(0, keep)));
    candidate += "...";
    raster = rasterize_text(candidate, size);
    if (raster.width <= max_width || keep == 0) return {std::move(raster), candidate, size};
  }
  return {rasterize_text("...", size), "...", size};
}

TextResult composite_text(const ImageBuffer& image, const FittedText& fitted, int ox, int oy) {
  const int w = image.width();
  const int h = image.height();
  const TextRaster& r = fitted.raster;

  double sum = 0.0;
  int count = 0;
  for (int y = std::max(oy, 0); y < std::min(oy + r.height, h); ++y) {
    for (int x = std::max(ox, 0); x < std::min(ox + r.width, w); ++x) {
      sum += luma(image.at(x, y));
      ++count;
    }
  }
  const double mean = count ? sum / count : 0.0;
  // Exactly 128 counts as light background, so it gets black text.
  const bool dark = mean < 128.0 - 1e-9;
  const Rgb color = dark ? Rgb{255, 255, 255} : Rgb{0, 0, 0};
  const Rgb outline = dark ? Rgb{0, 0, 0} : Rgb{255, 255, 255};

  auto ink_at = [&](int x, int y) {
    const int rx = x - ox;
    const int ry = y - oy;
    return rx >= 0 && ry >= 0 && rx < r.width && ry < r.height && r.at(rx, ry);
  };

  auto px = image.copy_pixels();
  Box bbox{w, h, -1, -1};
  for (int y = std::max(oy - 1, 0); y <= std::min(oy + r.height, h - 1); ++y) {
    for (int x = std::max(ox - 1, 0); x <= std::min(ox + r.width, w - 1); ++x) {
      auto& p = px[static_cast<std::size_t>(y) * w + x];
      if (ink_at(x, y)) {
        p = color;
        bbox = {std::min(bbox.x0, x), std::min(bbox.y0, y), std::max(bbox.x1, x), std::max(bbox.y1, y)};
        continue;
      }
      bool near = false;
      for (int dy = -1; dy <= 1 && !near; ++dy) {
        for (int dx = -1; dx <= 1 && !near; ++dx) near = ink_at(x + dx, y + dy);
      }
      if (near) p = outline;
    }
  }
  TextPlacement placement{bbox, color, outline, fitted.text, fitted.pixel_height};
  return {ImageBuffer(w, h, std::move(px)), std::move(placement)};
}

void require_text(std::string_view text) {
  if (trim(text).empty()) throw Error(ErrorKind::EmptyText, "text to add is empty");
}

}  // namespace

TextResult add_text(const ImageBuffer& image, std::string_view text, const TextTarget& target,
                    const EditConfig& config) {
  require_text(text);
  text = trim(text);
  const int w = image.width();
  const int h = image.height();

  if (const auto* anchor = std::get_if<Anchor>(&target)) {
    const Box cell = anchor_cell(w, h, *anchor, config);
    const FittedText fitted = fit_text(text, cell.width(), h, config);
    const int rw = fitted.raster.width;
    const int rh = fitted.raster.height;
    int ox = cell.x0;
    if (anchor->horizontal == HAlign::Center) ox = cell.x0 + (cell.width() - rw) / 2;
    if (anchor->horizontal == HAlign::Right) ox = cell.x1 - rw + 1;
    int oy = cell.y0;
    if (anchor->vertical == VAlign::Center) oy = cell.y0 + (cell.height() - rh) / 2;
    if (anchor->vertical == VAlign::Bottom) oy = cell.y1 - rh + 1;
    return composite_text(image, fitted, ox, oy);
  }

  const Point center = std::get<Point>(target);
  const int margin = static_cast<int>(std::lround(config.text_margin_fraction * std::min(w, h)));
  const FittedText fitted = fit_text(text, std::max(1, w - 2 * margin), h, config);
  const int rw = fitted.raster.width;
  const int rh = fitted.raster.height;
  const int ox = std::clamp(center.x - rw / 2, 0, std::max(0, w - rw));
  const int oy = std::clamp(center.y - rh / 2, 0, std::max(0, h - rh));
  return composite_text(image, fitted, ox, oy);
}

TextResult add_text(const ImageBuffer& image, std::string_view text, int object_index,
                    const ObjectRegistry& registry, const EditConfig& config) {
  require_text(text);
  return add_text(image, text, TextTarget{registry.mask(object_index).centroid()}, config);
}

// --- dispatch ---------------------------------------------------------------------

ActionResult apply_action(const ImageBuffer& image, const EditAction& action, std::optional<int> object_index,
                          const ObjectRegistry& registry, const InpaintStrategy& inpaint, const EditConfig& config) {
  auto target_mask = [&]() {
    if (!object_index) {
      throw Error(ErrorKind::PreconditionViolation,
                  std::string(to_string(action.kind())) + " needs a target object");
    }
    return registry.mask(*object_index);
  };

  return std::visit(
      [&](const auto& p) -> ActionResult {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BlurParams>) {
          return {blur_object(image, target_mask(), config), std::nullopt};
        } else if constexpr (std::is_same_v<T, RemoveParams>) {
          return {remove_object(image, target_mask(), inpaint, config), std::nullopt};
        } else if constexpr (std::is_same_v<T, ChangeColorParams>) {
          return {change_color(image, target_mask(), rgb_to_hsv(p.target)), std::nullopt};
        } else if constexpr (std::is_same_v<T, BrightnessParams>) {
          return {adjust_brightness(image, target_mask(), p.direction, config), std::nullopt};
        } else {
          TextResult r = p.anchor ? add_text(image, p.text, TextTarget{*p.anchor}, config)
                                  : add_text(image, p.text, target_mask().object_index(), registry, config);
          return {std::move(r.image), std::move(r.placement)};
        }
      },
      action.params);
}

}  // namespace vloop
