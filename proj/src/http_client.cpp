#include "http_client.hpp"

#include <httplib.h>

#include <chrono>
#include <thread>

#include "vloop/error.hpp"

namespace vloop::detail {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorKind::InvalidArgument, "URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

template <typename Send>
HttpResponse with_retries(const std::string& url, const HttpOptions& options, Send send) {
  const SplitUrl parts = split_url(url);
  std::string last_error;
  int backoff = options.backoff_ms;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
    httplib::Client client(parts.origin);
    const auto secs = options.timeout_ms / 1000;
    const auto usecs = (options.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    for (const auto& [k, v] : options.headers) headers.emplace(k, v);
    httplib::Result result = send(client, parts.path, headers);
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    return {result->status, result->body, result->get_header_value("Content-Type")};
  }
  throw Error(ErrorKind::BackendUnavailable, url + " unreachable after " + std::to_string(options.retries + 1) +
                                                 " attempts: " + last_error);
}

}  // namespace

HttpResponse http_post(const std::string& url, const std::string& body, const std::string& content_type,
                       const HttpOptions& options) {
  return with_retries(url, options, [&](httplib::Client& c, const std::string& path, const httplib::Headers& h) {
    return c.Post(path, h, body, content_type);
  });
}

HttpResponse http_get(const std::string& url, const HttpOptions& options) {
  return with_retries(url, options, [&](httplib::Client& c, const std::string& path, const httplib::Headers& h) {
    return c.Get(path, h);
  });
}

}  // namespace vloop::detail
