#include "vloop/image_io.hpp"

#include <openssl/evp.h>

#include <opencv2/imgcodecs.hpp>

#include <fstream>
#include <iterator>

#include "vloop/error.hpp"

namespace vloop {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::UnreadableFile, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

cv::Mat decode_raw(std::span<const std::uint8_t> bytes, int flags) {
  if (bytes.empty()) return {};
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  try {
    return cv::imdecode(buf, flags);
  } catch (const cv::Exception&) {
    return {};
  }
}

std::vector<std::uint8_t> encode(const cv::Mat& mat) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", mat, out, {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw Error(ErrorKind::InvalidArgument, "PNG encoding failed");
  }
  return out;
}

}  // namespace

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  cv::Mat mat = decode_raw(bytes, cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION);
  if (mat.empty() || mat.type() != CV_8UC3) throw Error(ErrorKind::UnreadableFile, "not a readable PNG/JPEG image");
  std::vector<Rgb> px(static_cast<std::size_t>(mat.rows) * mat.cols);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x) {
      px[static_cast<std::size_t>(y) * mat.cols + x] = {row[x][2], row[x][1], row[x][0]};
    }
  }
  return ImageBuffer(mat.cols, mat.rows, std::move(px));
}

ImageBuffer load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  cv::Mat mat(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      const Rgb c = image.at(x, y);
      row[x] = {c.b, c.g, c.r};
    }
  }
  return encode(mat);
}

void save_png(const ImageBuffer& image, const std::filesystem::path& path) { write_file(path, encode_png(image)); }

LabelMap decode_label_map(std::span<const std::uint8_t> bytes) {
  cv::Mat mat = decode_raw(bytes, cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw Error(ErrorKind::UnreadableFile, "not a readable label map");
  if (mat.channels() != 1) throw Error(ErrorKind::UnreadableFile, "label map must be single-channel");
  if (mat.depth() == CV_8U) mat.convertTo(mat, CV_16U);
  if (mat.depth() != CV_16U) throw Error(ErrorKind::UnreadableFile, "label map must be 8- or 16-bit");
  std::vector<std::uint16_t> labels(static_cast<std::size_t>(mat.rows) * mat.cols);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint16_t>(y);
    std::copy(row, row + mat.cols, labels.begin() + static_cast<std::ptrdiff_t>(y) * mat.cols);
  }
  return LabelMap(mat.cols, mat.rows, std::move(labels));
}

LabelMap load_label_map(const std::filesystem::path& path) { return decode_label_map(read_file(path)); }

std::vector<std::uint8_t> encode_label_map(const LabelMap& map) {
  cv::Mat mat(map.height(), map.width(), CV_16UC1);
  for (int y = 0; y < map.height(); ++y) {
    auto* row = mat.ptr<std::uint16_t>(y);
    for (int x = 0; x < map.width(); ++x) row[x] = map.at(x, y);
  }
  return encode(mat);
}

void save_label_map(const LabelMap& map, const std::filesystem::path& path) {
  write_file(path, encode_label_map(map));
}

std::vector<std::uint8_t> encode_mask_png(int width, int height, std::span<const std::uint8_t> bits) {
  cv::Mat mat(height, width, CV_8UC1);
  for (int y = 0; y < height; ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < width; ++x) row[x] = bits[static_cast<std::size_t>(y) * width + x] ? 255 : 0;
  }
  return encode(mat);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char ch : text) {
    if (ch != '\n' && ch != '\r' && ch != ' ') clean.push_back(ch);
  }
  if (clean.size() % 4 != 0) throw Error(ErrorKind::MalformedResponse, "base64 payload has bad length");
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw Error(ErrorKind::MalformedResponse, "invalid base64 payload");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the zero bytes that stand in for '=' padding.
  if (!clean.empty() && clean.back() == '=') --len;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

}  // namespace vloop
