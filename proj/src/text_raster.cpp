#include "vloop/text_raster.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace vloop {

TextRaster rasterize_text(std::string_view text, int pixel_height) {
  pixel_height = std::max(pixel_height, 4);
  const int font = cv::FONT_HERSHEY_SIMPLEX;
  const int thickness = std::max(1, static_cast<int>(std::lround(pixel_height / 12.0)));
  const double scale = cv::getFontScaleFromHeight(font, pixel_height, thickness);
  const std::string str(text);

  int baseline = 0;
  const cv::Size size = cv::getTextSize(str, font, scale, thickness, &baseline);
  const int pad = thickness + 2;
  cv::Mat canvas = cv::Mat::zeros(size.height + baseline + 2 * pad, size.width + 2 * pad, CV_8UC1);
  cv::putText(canvas, str, cv::Point(pad, pad + size.height), font, scale, cv::Scalar(255), thickness, cv::LINE_8);

  int x0 = canvas.cols, y0 = canvas.rows, x1 = -1, y1 = -1;
  for (int y = 0; y < canvas.rows; ++y) {
    const auto* row = canvas.ptr<std::uint8_t>(y);
    for (int x = 0; x < canvas.cols; ++x) {
      if (!row[x]) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  TextRaster out;
  if (x1 < 0) return out;
  out.width = x1 - x0 + 1;
  out.height = y1 - y0 + 1;
  out.ink.resize(static_cast<std::size_t>(out.width) * out.height);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.ink[static_cast<std::size_t>(y) * out.width + x] = canvas.at<std::uint8_t>(y0 + y, x0 + x) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace vloop
