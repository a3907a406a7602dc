#include "vloop/image.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <string>

#include "vloop/error.hpp"

namespace vloop {
namespace {

void check_dims(int width, int height, std::size_t count) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  }
  if (count != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorKind::DimensionMismatch, "pixel count does not match dimensions");
  }
}

std::string sha256_hex(const std::string& header, const void* data, std::size_t size) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int md_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, data, size);
  EVP_DigestFinal_ex(ctx, md.data(), &md_len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  hex.reserve(md_len * 2);
  char buf[3];
  for (unsigned int i = 0; i < md_len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width_, height_, pixels_.size());
}

ImageBuffer ImageBuffer::filled(int width, int height, Rgb color) {
  check_dims(width, height, static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0));
  return ImageBuffer(width, height, std::vector<Rgb>(static_cast<std::size_t>(width) * height, color));
}

LabelMap::LabelMap(int width, int height, std::vector<std::uint16_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  check_dims(width_, height_, labels_.size());
}

LabelMap LabelMap::empty(int width, int height) {
  check_dims(width, height, static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0));
  return LabelMap(width, height, std::vector<std::uint16_t>(static_cast<std::size_t>(width) * height, 0));
}

std::vector<int> LabelMap::indices() const {
  std::array<bool, 65536> seen{};
  for (auto v : labels_) seen[v] = true;
  std::vector<int> out;
  for (int i = 1; i < 65536; ++i) {
    if (seen[i]) out.push_back(i);
  }
  return out;
}

bool LabelMap::contains_index(int index) const {
  if (index <= 0 || index > 65535) return false;
  return std::find(labels_.begin(), labels_.end(), static_cast<std::uint16_t>(index)) != labels_.end();
}

std::size_t LabelMap::support() const {
  return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(), [](auto v) { return v != 0; }));
}

std::string digest(const ImageBuffer& image) {
  const std::string header = "rgb8:" + std::to_string(image.width()) + "x" + std::to_string(image.height()) + "\n";
  static_assert(sizeof(Rgb) == 3);
  return sha256_hex(header, image.pixels().data(), image.pixels().size() * sizeof(Rgb));
}

std::string digest(const LabelMap& map) {
  const std::string header = "label16:" + std::to_string(map.width()) + "x" + std::to_string(map.height()) + "\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(map.labels().size() * 2);
  for (auto v : map.labels()) {
    bytes.push_back(static_cast<unsigned char>(v >> 8));
    bytes.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return sha256_hex(header, bytes.data(), bytes.size());
}

}  // namespace vloop
