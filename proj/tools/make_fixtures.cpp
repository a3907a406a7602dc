// Draws the synthetic fixture scenes (image + label map) under tests/data.
// Output is deterministic; rerunning overwrites the committed files byte-for-byte.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <vector>

#include <CLI11.hpp>

#include "vloop/image.hpp"
#include "vloop/image_io.hpp"

namespace fs = std::filesystem;
using vloop::Rgb;

namespace {

constexpr int kW = 320;
constexpr int kH = 240;

class Canvas {
 public:
  Canvas() : pixels_(kW * kH), labels_(kW * kH, 0), rng_(20240917) {}

  using Shape = std::function<bool(int, int)>;

  /// Paints `shape` in `color` with a vertical shade and light grain, and
  /// assigns `label` (0 leaves the label untouched).
  void paint(const Shape& shape, Rgb color, std::uint16_t label, double shade = 0.15) {
    for (int y = 0; y < kH; ++y) {
      for (int x = 0; x < kW; ++x) {
        if (!shape(x, y)) continue;
        const double t = 1.0 + shade * (0.5 - static_cast<double>(y) / kH);
        const int grain = static_cast<int>(rng_() % 13) - 6;
        auto ch = [&](std::uint8_t c) {
          return static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(c * t)) + grain, 0, 255));
        };
        pixels_[y * kW + x] = {ch(color.r), ch(color.g), ch(color.b)};
        if (label) labels_[y * kW + x] = label;
      }
    }
  }

  void save(const fs::path& dir) const {
    fs::create_directories(dir);
    vloop::save_png(vloop::ImageBuffer(kW, kH, pixels_), dir / "image.png");
    vloop::save_label_map(vloop::LabelMap(kW, kH, labels_), dir / "labels.png");
  }

 private:
  std::vector<Rgb> pixels_;
  std::vector<std::uint16_t> labels_;
  std::mt19937 rng_;
};

Canvas::Shape rect(int x0, int y0, int x1, int y1) {
  return [=](int x, int y) { return x >= x0 && x <= x1 && y >= y0 && y <= y1; };
}

Canvas::Shape ellipse(double cx, double cy, double rx, double ry) {
  return [=](int x, int y) {
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
  };
}

Canvas::Shape either(Canvas::Shape a, Canvas::Shape b) {
  return [=](int x, int y) { return a(x, y) || b(x, y); };
}

// Two triangles meeting at a knot.
Canvas::Shape bow(int cx, int cy, int half_w, int half_h) {
  return [=](int x, int y) {
    const int dx = std::abs(x - cx);
    const int dy = std::abs(y - cy);
    if (dx > half_w) return false;
    return dx <= 3 ? dy <= 3 : dy <= half_h * dx / half_w;
  };
}

void cats(const fs::path& dir) {
  Canvas c;
  c.paint(rect(0, 130, kW - 1, kH - 1), {125, 84, 50}, 0);                      // floor
  c.paint(rect(0, 0, kW - 1, 129), {205, 160, 82}, 1);                          // wall
  c.paint(rect(0, 60, 45, kH - 1), {42, 32, 26}, 7);                            // dark corner
  c.paint(ellipse(205, 218, 85, 14), {66, 44, 30}, 3);                          // floor shadow
  c.paint(ellipse(287, 34, 30, 30), {255, 241, 205}, 6);                        // flare
  c.paint(either(ellipse(128, 44, 17, 19), ellipse(128, 98, 34, 42)), {150, 92, 118}, 5);  // woman
  c.paint(ellipse(128, 40, 12, 13), {222, 182, 150}, 5, 0.0);                   // her face
  c.paint(either(ellipse(196, 168, 33, 40), ellipse(196, 116, 21, 20)), {222, 132, 52}, 2);  // orange cat
  c.paint(either(ellipse(100, 172, 38, 44), ellipse(100, 120, 24, 22)), {236, 226, 204}, 4);  // cream cat
  c.paint(bow(100, 146, 14, 7), {204, 22, 34}, 8, 0.0);                         // bow tie
  c.save(dir);
}

void dog(const fs::path& dir) {
  Canvas c;
  c.paint(rect(0, 0, kW - 1, 149), {236, 236, 231}, 1);
  for (int x = 20; x < kW; x += 60) c.paint(rect(x, 70, x + 2, 149), {205, 205, 200}, 1, 0.0);  // paneling
  c.paint(rect(0, 150, kW - 1, kH - 1), {62, 46, 36}, 2);
  c.paint(rect(192, 40, 292, 172), {24, 24, 24}, 4, 0.0);                       // frame
  c.paint(rect(202, 50, 282, 162), {232, 232, 232}, 4, 0.0);                    // mat
  c.paint(either(ellipse(242, 82, 16, 19), ellipse(242, 140, 30, 22)), {70, 70, 70}, 4, 0.0);  // portrait
  c.paint(either(ellipse(108, 168, 44, 52), ellipse(108, 104, 28, 26)), {246, 245, 240}, 3);
  c.paint(ellipse(168, 214, 25, 10), {231, 225, 210}, 5, 0.0);
  c.save(dir);
}

void bathroom(const fs::path& dir) {
  Canvas c;
  c.paint(rect(0, 0, kW - 1, 149), {40, 48, 70}, 1);
  c.paint(rect(0, 150, kW - 1, kH - 1), {128, 128, 130}, 4);
  c.paint(ellipse(200, 200, 60, 18), {96, 98, 104}, 4, 0.0);                    // sink basin
  c.paint(rect(8, 30, 58, 150), {132, 132, 136}, 2);                            // towel
  c.paint(rect(68, 140, 98, 150), {212, 222, 226}, 3, 0.0);                     // tray
  c.paint(rect(104, 104, 124, 148), {214, 226, 232}, 5);                        // swab jar
  c.paint(rect(102, 98, 126, 104), {244, 244, 244}, 5, 0.0);
  c.paint(ellipse(140, 140, 9, 8), {128, 146, 134}, 6, 0.0);
  c.paint(rect(156, 96, 178, 148), {238, 238, 236}, 7);
  c.paint(either(rect(186, 100, 202, 148), rect(191, 88, 197, 100)), {40, 150, 150}, 8);  // pump
  c.paint(either(rect(212, 92, 232, 148), rect(218, 82, 226, 92)), {36, 72, 196}, 9);
  c.paint(rect(242, 122, 252, 148), {34, 26, 22}, 10, 0.0);
  c.paint(rect(262, 96, 266, 148), {236, 236, 236}, 11, 0.0);                   // brush handle
  c.paint(rect(260, 92, 268, 104), {206, 30, 36}, 11, 0.0);
  c.save(dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Draw the fixture scenes"};
  fs::path out = "tests/data";
  app.add_option("--out", out, "Destination directory");
  CLI11_PARSE(app, argc, argv);
  try {
    cats(out / "cats");
    dog(out / "dog");
    bathroom(out / "bathroom");
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote cats, dog and bathroom under " << out << '\n';
  return 0;
}
