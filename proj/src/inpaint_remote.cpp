#include <json.hpp>

#include "http_client.hpp"
#include "vloop/edit_ops.hpp"
#include "vloop/error.hpp"
#include "vloop/image_io.hpp"

namespace vloop {

RemoteInpaint::RemoteInpaint(std::string endpoint, int timeout_ms, int retries)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms), retries_(retries) {}

ImageBuffer RemoteInpaint::fill(const ImageBuffer& image, const MaskRegion& fill_region) const {
  const nlohmann::json request = {
      {"width", image.width()},
      {"height", image.height()},
      {"image_png_base64", base64_encode(encode_png(image))},
      {"mask_png_base64", base64_encode(encode_mask_png(fill_region.width(), fill_region.height(), fill_region.bits()))},
  };
  detail::HttpOptions options;
  options.timeout_ms = timeout_ms_;
  options.retries = retries_;
  const auto response = detail::http_post(endpoint_, request.dump(), "application/json", options);
  if (response.status >= 400) {
    throw Error(ErrorKind::BackendRefused, "inpainting service answered HTTP " + std::to_string(response.status));
  }
  try {
    const auto body = nlohmann::json::parse(response.body);
    return decode_image(base64_decode(body.at("image_png_base64").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("inpainting response: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("inpainting response: ") + e.what());
  }
}

}  // namespace vloop
