#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "vloop/color.hpp"
#include "vloop/edit_ops.hpp"
#include "vloop/error.hpp"

using namespace vloop;

namespace {

// Layer-by-layer fill written as repeated sweeps over the unknown set.
ImageBuffer onion_oracle(const ImageBuffer& img, const MaskRegion& region) {
  const int w = img.width(), h = img.height();
  std::vector<std::array<double, 3>> val(w * h);
  std::vector<char> known(w * h);
  for (int i = 0; i < w * h; ++i) {
    const Rgb c = img.pixels()[i];
    val[i] = {double(c.r), double(c.g), double(c.b)};
    known[i] = !region.contains(i % w, i / w);
  }
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<std::pair<int, std::array<double, 3>>> layer;
    for (int i = 0; i < w * h; ++i) {
      if (known[i]) continue;
      std::array<double, 3> sum{};
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = i % w + dx, y = i / w + dy;
          if ((dx || dy) && x >= 0 && y >= 0 && x < w && y < h && known[y * w + x]) {
            for (int c = 0; c < 3; ++c) sum[c] += val[y * w + x][c];
            ++n;
          }
        }
      }
      if (n) layer.push_back({i, {sum[0] / n, sum[1] / n, sum[2] / n}});
    }
    for (auto& [i, v] : layer) val[i] = v, known[i] = 1, progress = true;
  }
  std::vector<Rgb> px(w * h);
  auto q = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
  for (int i = 0; i < w * h; ++i) px[i] = {q(val[i][0]), q(val[i][1]), q(val[i][2])};
  return ImageBuffer(w, h, std::move(px));
}

}  // namespace

TEST(Blur, SigmaFollowsBoxExtent) {
  std::vector<std::uint8_t> bits(100 * 100, 0);
  for (int y = 10; y < 90; ++y) bits[y * 100 + 50] = 1;
  const MaskRegion tall(1, 100, 100, bits);
  EXPECT_DOUBLE_EQ(blur_sigma(tall, {}), 5.0);
  bits.assign(100 * 100, 0);
  bits[0] = 1;
  EXPECT_DOUBLE_EQ(blur_sigma(MaskRegion(1, 100, 100, bits), {}), 3.0);
}

TEST(Blur, KernelIsNormalizedWithRadiusThreeSigma) {
  const auto k = gaussian_kernel(2.2);
  EXPECT_EQ(k.size(), 2u * 7 + 1);
  double s = 0;
  for (double t : k) s += t;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(k.front(), k.back());
}

TEST(Blur, MatchesDirectConvolutionOracle) {
  std::mt19937 rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageBuffer img = vt::random_image(rng, 32, 32);
    const MaskRegion mask = vt::random_mask(rng, 32, 32);
    const ImageBuffer got = blur_object(img, mask);
    const ImageBuffer want = vt::blur_oracle(img, mask, blur_sigma(mask, {}));
    int worst = 0;
    for (std::size_t i = 0; i < got.pixels().size(); ++i) {
      const Rgb a = got.pixels()[i], b = want.pixels()[i];
      worst = std::max({worst, std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
    }
    EXPECT_LE(worst, 1);
  }
}

TEST(Blur, RepeatedBlurDoesNotSharpen) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    ImageBuffer img = vt::random_image(rng, 32, 32);
    const MaskRegion mask = vt::random_mask(rng, 32, 32);
    double prev = vt::masked_laplacian_variance(img, mask);
    for (int k = 0; k < 5; ++k) {
      img = blur_object(img, mask);
      const double now = vt::masked_laplacian_variance(img, mask);
      // Rounding to 8 bits alone gives the 5-point stencil a variance of 20/12.
      EXPECT_TRUE(now <= prev + 1e-9 || now <= vt::kQuantizedLaplacianVariance) << "trial " << trial << " pass " << k << ": " << now;
      prev = now;
    }
  }
}

TEST(Brightness, ExactClampedShiftInsideMask) {
  std::mt19937 rng(64);
  const ImageBuffer img = vt::random_image(rng, 64, 64);
  const MaskRegion mask = vt::random_mask(rng, 64, 64);
  for (Direction d : {Direction::Brighter, Direction::Darker}) {
    const ImageBuffer out = adjust_brightness(img, mask, d);
    const int delta = d == Direction::Brighter ? 40 : -40;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const Rgb a = img.at(x, y), b = out.at(x, y);
        if (mask.contains(x, y)) {
          ASSERT_EQ(b.r, std::clamp(a.r + delta, 0, 255));
          ASSERT_EQ(b.g, std::clamp(a.g + delta, 0, 255));
          ASSERT_EQ(b.b, std::clamp(a.b + delta, 0, 255));
        } else {
          ASSERT_EQ(a, b);
        }
      }
    }
  }
}

TEST(ChangeColor, SaturatedRegionTurnsBlue) {
  std::mt19937 rng(240);
  std::vector<Rgb> px(48 * 48);
  for (auto& p : px) {
    p = {static_cast<std::uint8_t>(150 + rng() % 100), static_cast<std::uint8_t>(rng() % 60),
         static_cast<std::uint8_t>(rng() % 60)};
  }
  const ImageBuffer img(48, 48, px);
  const MaskRegion mask = vt::random_mask(rng, 48, 48);
  const ImageBuffer out = change_color(img, mask, rgb_to_hsv({0, 0, 255}));
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      if (!mask.contains(x, y)) continue;
      const ColorHSV before = rgb_to_hsv(img.at(x, y));
      const ColorHSV after = rgb_to_hsv(out.at(x, y));
      const Rgb o = out.at(x, y), i = img.at(x, y);
      EXPECT_LE(std::abs(std::max({o.r, o.g, o.b}) - std::max({i.r, i.g, i.b})), 1);
      if (after.s * after.v >= 0.1) EXPECT_NEAR(after.h, 240.0, 2.0);
      EXPECT_GE(after.s + 1e-2, std::max(before.s, 0.4));
    }
  }
}

TEST(ChangeColor, AchromaticTargetDesaturates) {
  const ImageBuffer img = ImageBuffer::filled(8, 8, {200, 40, 40});
  std::vector<std::uint8_t> bits(64, 0);
  bits[9] = 1;
  const ImageBuffer out = change_color(img, MaskRegion(1, 8, 8, bits), rgb_to_hsv({128, 128, 128}));
  const Rgb p = out.at(1, 1);
  EXPECT_EQ(p.r, p.g);
  EXPECT_EQ(p.g, p.b);
  EXPECT_EQ(out.at(0, 0), img.at(0, 0));
}

TEST(Inpaint, MatchesLayerSweepOracle) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageBuffer img = vt::random_image(rng, 24, 20);
    const MaskRegion region = vt::random_mask(rng, 24, 20);
    EXPECT_EQ(inpaint_boundary_fill(img, region), onion_oracle(img, region));
  }
}

TEST(Inpaint, FlatSurroundFillsFlat) {
  const ImageBuffer img = ImageBuffer::filled(20, 20, {10, 120, 200});
  std::vector<std::uint8_t> bits(400, 0);
  for (int y = 5; y < 15; ++y) {
    for (int x = 5; x < 15; ++x) bits[y * 20 + x] = 1;
  }
  auto px = img.copy_pixels();
  for (int i = 0; i < 400; ++i) {
    if (bits[i]) px[i] = {255, 0, 0};
  }
  const ImageBuffer out = inpaint_boundary_fill(ImageBuffer(20, 20, px), MaskRegion(1, 20, 20, bits));
  EXPECT_EQ(out, img);
}

TEST(Inpaint, FullCoverRejected) {
  const ImageBuffer img = ImageBuffer::filled(4, 4, {1, 1, 1});
  try {
    inpaint_boundary_fill(img, MaskRegion(1, 4, 4, std::vector<std::uint8_t>(16, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MaskCoversImage);
  }
}

TEST(Remove, WritesOnlyTheDilatedMask) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageBuffer img = vt::random_image(rng, 40, 32);
    const MaskRegion mask = vt::random_mask(rng, 40, 32);
    const MaskRegion region = removal_region(mask);
    if (region.covers_everything()) continue;
    const ImageBuffer out = remove_object(img, mask, BaselineInpaint{});
    EXPECT_EQ(vt::changes_outside(img, out, [&](int x, int y) { return region.contains(x, y); }), 0u);
  }
}

TEST(Locality, EveryActionStaysInsideItsWriteRegion) {
  std::mt19937 rng(2024);
  const BaselineInpaint inpaint;
  for (int trial = 0; trial < 50; ++trial) {
    const int w = vt::uniform(rng, 24, 64), h = vt::uniform(rng, 24, 64);
    const ImageBuffer img = vt::random_image(rng, w, h);
    const MaskRegion mask = vt::random_mask(rng, w, h);
    auto in_mask = [&](int x, int y) { return mask.contains(x, y); };
    EXPECT_EQ(vt::changes_outside(img, blur_object(img, mask), in_mask), 0u);
    EXPECT_EQ(vt::changes_outside(img, change_color(img, mask, rgb_to_hsv({0, 128, 0})), in_mask), 0u);
    EXPECT_EQ(vt::changes_outside(img, adjust_brightness(img, mask, Direction::Darker), in_mask), 0u);
    const MaskRegion region = removal_region(mask);
    if (!region.covers_everything()) {
      EXPECT_EQ(vt::changes_outside(img, remove_object(img, mask, inpaint),
                                    [&](int x, int y) { return region.contains(x, y); }),
                0u);
    }
    const TextResult t = add_text(img, "Hi there", TextTarget{mask.centroid()});
    const Box outlined = t.placement.bbox.inflated(1);
    EXPECT_EQ(vt::changes_outside(img, t.image, [&](int x, int y) { return outlined.contains(x, y); }), 0u);
  }
}

TEST(Anchor, NamesRoundTrip) {
  for (auto h : {HAlign::Left, HAlign::Center, HAlign::Right}) {
    for (auto v : {VAlign::Top, VAlign::Center, VAlign::Bottom}) {
      const Anchor a{h, v};
      EXPECT_EQ(anchor_from_string(to_string(a)), a);
    }
  }
  EXPECT_EQ(anchor_from_string("right top"), (Anchor{HAlign::Right, VAlign::Top}));
  EXPECT_FALSE(anchor_from_string("upper"));
}

TEST(Anchor, CellIsMarginShrunkThird) {
  const Box cell = anchor_cell(320, 240, {HAlign::Right, VAlign::Center});
  const int m = static_cast<int>(std::lround(0.02 * 240));
  EXPECT_EQ(cell, (Box{2 * 320 / 3 + m, 240 / 3 + m, 320 - 1 - m, 2 * 240 / 3 - 1 - m}));
}

TEST(Text, PlacedInsideAnchorCellWithContrast) {
  const ImageBuffer dark = ImageBuffer::filled(320, 240, {20, 20, 30});
  const Anchor a{HAlign::Left, VAlign::Top};
  const TextResult r = add_text(dark, "Hello", TextTarget{a});
  const Box cell = anchor_cell(320, 240, a);
  EXPECT_GE(r.placement.bbox.x0, cell.x0);
  EXPECT_GE(r.placement.bbox.y0, cell.y0);
  EXPECT_LE(r.placement.bbox.x1, cell.x1);
  EXPECT_LE(r.placement.bbox.y1, cell.y1);
  EXPECT_EQ(r.placement.color, (Rgb{255, 255, 255}));
  EXPECT_EQ(r.placement.rendered_text, "Hello");
  EXPECT_EQ(r.placement.pixel_height, 12);

  const TextResult light = add_text(ImageBuffer::filled(320, 240, {128, 128, 128}), "Hello", TextTarget{a});
  EXPECT_EQ(light.placement.color, (Rgb{0, 0, 0}));
}

TEST(Text, OverlongTextIsTruncatedWithEllipsis) {
  const ImageBuffer img = ImageBuffer::filled(120, 90, {200, 200, 200});
  const TextResult r = add_text(img, "Please call 12345 if you find this cat anywhere nearby", TextTarget{Anchor{}});
  ASSERT_GE(r.placement.rendered_text.size(), 3u);
  EXPECT_EQ(r.placement.rendered_text.substr(r.placement.rendered_text.size() - 3), "...");
  const Box cell = anchor_cell(120, 90, Anchor{});
  EXPECT_LE(r.placement.bbox.width(), cell.width());
}

TEST(Text, BlankTextRejected) {
  try {
    add_text(ImageBuffer::filled(10, 10, {}), "   ", TextTarget{Anchor{}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyText);
  }
}

TEST(Dispatch, TargetlessActionIsPrecondition) {
  const auto labels = std::make_shared<const LabelMap>(LabelMap::empty(8, 8));
  const ObjectRegistry reg = ObjectRegistry::from_label_map(labels);
  try {
    apply_action(ImageBuffer::filled(8, 8, {}), EditAction{BlurParams{}}, std::nullopt, reg, BaselineInpaint{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PreconditionViolation);
  }
}

TEST(Dispatch, AnchoredTextNeedsNoObject) {
  const auto labels = std::make_shared<const LabelMap>(LabelMap::empty(60, 60));
  const ObjectRegistry reg = ObjectRegistry::from_label_map(labels);
  const auto r = apply_action(ImageBuffer::filled(60, 60, {}), EditAction{AddTextParams{"ok", Anchor{}}},
                              std::nullopt, reg, BaselineInpaint{});
  ASSERT_TRUE(r.text);
  EXPECT_EQ(r.text->rendered_text, "ok");
}
