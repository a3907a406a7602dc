#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vloop/image.hpp"

namespace vloop {

/// PNG or JPEG; alpha is dropped. Throws UnreadableFile.
ImageBuffer load_image(const std::filesystem::path& path);
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

void save_png(const ImageBuffer& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

/// Single-channel 16-bit PNG where each value is an object index.
LabelMap load_label_map(const std::filesystem::path& path);
LabelMap decode_label_map(std::span<const std::uint8_t> bytes);
void save_label_map(const LabelMap& map, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_label_map(const LabelMap& map);

/// Gray PNG of a 0/1 mask scaled to 0/255, used on the inpainting wire.
std::vector<std::uint8_t> encode_mask_png(int width, int height, std::span<const std::uint8_t> bits);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace vloop
