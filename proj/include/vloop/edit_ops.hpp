#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "vloop/color.hpp"
#include "vloop/image.hpp"
#include "vloop/mask.hpp"
#include "vloop/registry.hpp"

namespace vloop {

struct EditConfig {
  double blur_sigma_min = 3.0;
  double blur_sigma_divisor = 16.0;
  int brightness_step = 40;
  int dilation_radius = 5;
  double text_size_fraction = 0.05;
  double text_min_fraction = 0.02;
  double text_margin_fraction = 0.02;
};

enum class HAlign { Left, Center, Right };
enum class VAlign { Top, Center, Bottom };

/// One of the nine thirds-grid text positions.
struct Anchor {
  HAlign horizontal = HAlign::Center;
  VAlign vertical = VAlign::Center;
  friend constexpr bool operator==(const Anchor&, const Anchor&) = default;
};

/// "top-right", "center-center", ...
std::string to_string(const Anchor& anchor);
std::optional<Anchor> anchor_from_string(std::string_view text);

enum class ActionKind { Blur, Remove, ChangeColor, AdjustBrightness, AddText };
enum class Direction { Brighter, Darker };

std::string_view to_string(ActionKind kind) noexcept;
std::optional<ActionKind> action_kind_from_string(std::string_view name);

struct BlurParams {
  friend bool operator==(const BlurParams&, const BlurParams&) = default;
};
struct RemoveParams {
  friend bool operator==(const RemoveParams&, const RemoveParams&) = default;
};
struct ChangeColorParams {
  std::string color_name;
  Rgb target;
  friend bool operator==(const ChangeColorParams&, const ChangeColorParams&) = default;
};
struct BrightnessParams {
  Direction direction = Direction::Brighter;
  friend bool operator==(const BrightnessParams&, const BrightnessParams&) = default;
};
/// Without an anchor the text goes on the intent's target object.
struct AddTextParams {
  std::string text;
  std::optional<Anchor> anchor;
  friend bool operator==(const AddTextParams&, const AddTextParams&) = default;
};

using EditParams = std::variant<BlurParams, RemoveParams, ChangeColorParams, BrightnessParams, AddTextParams>;

struct EditAction {
  EditParams params;
  ActionKind kind() const noexcept { return static_cast<ActionKind>(params.index()); }
  friend bool operator==(const EditAction&, const EditAction&) = default;
};

// --- primitive edits ------------------------------------------------------

double blur_sigma(const MaskRegion& mask, const EditConfig& config) noexcept;
/// Normalized 1-D Gaussian taps, radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

ImageBuffer blur_object(const ImageBuffer& image, const MaskRegion& mask, const EditConfig& config = {});

ImageBuffer change_color(const ImageBuffer& image, const MaskRegion& mask, const ColorHSV& target);

ImageBuffer adjust_brightness(const ImageBuffer& image, const MaskRegion& mask, Direction direction,
                              const EditConfig& config = {});

/// Background synthesis for removal.
class InpaintStrategy {
 public:
  virtual ~InpaintStrategy() = default;
  virtual std::string name() const = 0;
  virtual ImageBuffer fill(const ImageBuffer& image, const MaskRegion& fill_region) const = 0;
};

/// Onion-peel fill: each layer takes the mean of its already-known 8-neighbours.
ImageBuffer inpaint_boundary_fill(const ImageBuffer& image, const MaskRegion& fill_region);

class BaselineInpaint final : public InpaintStrategy {
 public:
  std::string name() const override { return "baseline"; }
  ImageBuffer fill(const ImageBuffer& image, const MaskRegion& fill_region) const override {
    return inpaint_boundary_fill(image, fill_region);
  }
};

/// POSTs image and mask to an inpainting service; see docs/wire_protocols.md.
class RemoteInpaint final : public InpaintStrategy {
 public:
  RemoteInpaint(std::string endpoint, int timeout_ms, int retries = 2);
  std::string name() const override { return "remote"; }
  ImageBuffer fill(const ImageBuffer& image, const MaskRegion& fill_region) const override;

 private:
  std::string endpoint_;
  int timeout_ms_;
  int retries_;
};

/// The region Remove may write: the mask dilated by the configured radius.
MaskRegion removal_region(const MaskRegion& mask, const EditConfig& config = {});

ImageBuffer remove_object(const ImageBuffer& image, const MaskRegion& mask, const InpaintStrategy& strategy,
                          const EditConfig& config = {});

struct TextPlacement {
  Box bbox;  // tight ink box; the outline extends one pixel beyond it
  Rgb color;
  Rgb outline;
  std::string rendered_text;  // after ellipsis truncation
  int pixel_height = 0;
};

struct TextResult {
  ImageBuffer image;
  TextPlacement placement;
};

using TextTarget = std::variant<Anchor, Point>;

/// Anchor cell: the matching third of the image shrunk by the margin.
Box anchor_cell(int width, int height, const Anchor& anchor, const EditConfig& config = {});

TextResult add_text(const ImageBuffer& image, std::string_view text, const TextTarget& target,
                    const EditConfig& config = {});
/// Object-targeted form: centers on the object's centroid.
TextResult add_text(const ImageBuffer& image, std::string_view text, int object_index,
                    const ObjectRegistry& registry, const EditConfig& config = {});

// --- dispatch ---------------------------------------------------------------

struct ActionResult {
  ImageBuffer image;
  std::optional<TextPlacement> text;
};

/// Applies `action` to `image`. `object_index` names the target object; it may
/// be empty only for anchored AddText.
ActionResult apply_action(const ImageBuffer& image, const EditAction& action, std::optional<int> object_index,
                          const ObjectRegistry& registry, const InpaintStrategy& inpaint,
                          const EditConfig& config = {});

}  // namespace vloop
