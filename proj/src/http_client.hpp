#pragma once

#include <string>
#include <utility>
#include <vector>

namespace vloop::detail {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

struct HttpOptions {
  int timeout_ms = 30000;
  int retries = 2;
  int backoff_ms = 200;  // doubled after each failed attempt
  std::vector<std::pair<std::string, std::string>> headers;
};

/// POST with retries on transport failures and 5xx replies. Throws
/// BackendUnavailable once retries are exhausted; 4xx replies are returned.
HttpResponse http_post(const std::string& url, const std::string& body, const std::string& content_type,
                       const HttpOptions& options);

HttpResponse http_get(const std::string& url, const HttpOptions& options);

}  // namespace vloop::detail
