#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vloop/image.hpp"

namespace vloop {

class SegmentationProvider {
 public:
  virtual ~SegmentationProvider() = default;
  /// Throws SegmentationUnavailable, DimensionMismatch, or MalformedResponse.
  virtual LabelMap segment(const ImageBuffer& image) const = 0;
};

/// Loads a label-map PNG and checks it against the image. Throws
/// UnreadableFile or DimensionMismatch.
LabelMap from_fixture(const std::filesystem::path& path, const ImageBuffer& image);

class FixtureSegmentation final : public SegmentationProvider {
 public:
  explicit FixtureSegmentation(std::filesystem::path path) : path_(std::move(path)) {}
  LabelMap segment(const ImageBuffer& image) const override { return from_fixture(path_, image); }

 private:
  std::filesystem::path path_;
};

struct MaskConversion {
  LabelMap labels;
  std::size_t overlap_pixels = 0;  // pixels claimed by more than one mask
};

/// Decodes row-major alternating run lengths that start with a background run.
std::vector<bool> decode_rle(const std::vector<std::int64_t>& runs, int width, int height);

/// Masks become indices 1..k in order; where masks overlap the later one wins.
MaskConversion labels_from_masks(int width, int height, const std::vector<std::vector<bool>>& masks);

/// Parses a segmentation service reply (see docs/wire_protocols.md).
MaskConversion parse_segmentation_response(const nlohmann::json& reply, int width, int height);

/// POSTs the image as PNG and converts the reply. Throws BackendUnavailable or
/// MalformedResponse.
MaskConversion from_remote(const ImageBuffer& image, const std::string& endpoint, int timeout_ms = 60000,
                           int retries = 2);

class RemoteSegmentation final : public SegmentationProvider {
 public:
  RemoteSegmentation(std::string endpoint, int timeout_ms = 60000, int retries = 2)
      : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms), retries_(retries) {}
  LabelMap segment(const ImageBuffer& image) const override;

 private:
  std::string endpoint_;
  int timeout_ms_;
  int retries_;
};

}  // namespace vloop
