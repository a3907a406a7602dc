#include "vloop/segmentation.hpp"

#include <iostream>
#include <limits>

#include "http_client.hpp"
#include "vloop/error.hpp"
#include "vloop/image_io.hpp"

namespace vloop {

LabelMap from_fixture(const std::filesystem::path& path, const ImageBuffer& image) {
  LabelMap map = load_label_map(path);
  if (map.width() != image.width() || map.height() != image.height()) {
    throw Error(ErrorKind::DimensionMismatch, "label map " + path.string() + " is " + std::to_string(map.width()) +
                                                  "x" + std::to_string(map.height()) + " but the image is " +
                                                  std::to_string(image.width()) + "x" +
                                                  std::to_string(image.height()));
  }
  return map;
}

std::vector<bool> decode_rle(const std::vector<std::int64_t>& runs, int width, int height) {
  const auto total = static_cast<std::int64_t>(width) * height;
  std::vector<bool> bits(static_cast<std::size_t>(total), false);
  std::int64_t pos = 0;
  bool on = false;
  for (const auto run : runs) {
    if (run < 0 || pos + run > total) throw Error(ErrorKind::MalformedResponse, "mask runs overflow the image");
    if (on) std::fill(bits.begin() + pos, bits.begin() + pos + run, true);
    pos += run;
    on = !on;
  }
  if (pos != total) throw Error(ErrorKind::MalformedResponse, "mask runs do not cover the image");
  return bits;
}

MaskConversion labels_from_masks(int width, int height, const std::vector<std::vector<bool>>& masks) {
  if (masks.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorKind::MalformedResponse, "too many masks for a 16-bit label map");
  }
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::uint16_t> labels(n, 0);
  std::size_t overlap = 0;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    if (masks[k].size() != n) throw Error(ErrorKind::DimensionMismatch, "mask size does not match the image");
    for (std::size_t i = 0; i < n; ++i) {
      if (!masks[k][i]) continue;
      if (labels[i] != 0) ++overlap;
      labels[i] = static_cast<std::uint16_t>(k + 1);
    }
  }
  return {LabelMap(width, height, std::move(labels)), overlap};
}

MaskConversion parse_segmentation_response(const nlohmann::json& reply, int width, int height) {
  try {
    if (reply.contains("label_map_png_base64")) {
      const auto bytes = base64_decode(reply["label_map_png_base64"].get<std::string>());
      LabelMap map = decode_label_map(bytes);
      if (map.width() != width || map.height() != height) {
        throw Error(ErrorKind::MalformedResponse, "segmentation label map has the wrong size");
      }
      return {std::move(map), 0};
    }
    if (reply.value("width", width) != width || reply.value("height", height) != height) {
      throw Error(ErrorKind::MalformedResponse, "segmentation reply dimensions do not match the image");
    }
    std::vector<std::vector<bool>> masks;
    for (const auto& m : reply.value("masks", nlohmann::json::array())) {
      masks.push_back(decode_rle(m.at("rle").get<std::vector<std::int64_t>>(), width, height));
    }
    return labels_from_masks(width, height, masks);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("segmentation reply: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnreadableFile) throw Error(ErrorKind::MalformedResponse, e.what());
    throw;
  }
}

MaskConversion from_remote(const ImageBuffer& image, const std::string& endpoint, int timeout_ms, int retries) {
  detail::HttpOptions options;
  options.timeout_ms = timeout_ms;
  options.retries = retries;
  const auto png = encode_png(image);
  const auto response =
      detail::http_post(endpoint, std::string(png.begin(), png.end()), "image/png", options);
  if (response.status >= 400) {
    throw Error(ErrorKind::BackendUnavailable,
                "segmentation service answered HTTP " + std::to_string(response.status));
  }
  nlohmann::json reply;
  try {
    reply = response.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(response.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("segmentation reply is not JSON: ") + e.what());
  }
  return parse_segmentation_response(reply, image.width(), image.height());
}

LabelMap RemoteSegmentation::segment(const ImageBuffer& image) const {
  auto result = from_remote(image, endpoint_, timeout_ms_, retries_);
  if (result.overlap_pixels > 0) {
    std::clog << "vloop: segmentation masks overlapped on " << result.overlap_pixels
              << " pixels; later masks kept\n";
  }
  return std::move(result.labels);
}

}  // namespace vloop
