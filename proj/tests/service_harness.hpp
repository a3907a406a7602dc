#pragma once

#include <httplib.h>

#include <thread>

#include "support.hpp"
#include "vloop/image_io.hpp"
#include "vloop/service.hpp"

namespace vt {

/// A Service listening on an ephemeral local port for the lifetime of the object.
class RunningService {
 public:
  explicit RunningService(vloop::ServiceOptions options) : service_(std::move(options)) {
    port_ = service_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_.run(); });
    httplib::Client probe("127.0.0.1", port_);
    for (int i = 0; i < 200 && !probe.Get("/sessions"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ~RunningService() {
    service_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }
  vloop::Service& service() { return service_; }

 private:
  vloop::Service service_;
  int port_ = 0;
  std::thread thread_;
};

inline std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// POST /sessions with a fixture scene's image and labels.
inline httplib::Result create_scene_session(httplib::Client& c, const std::string& scene) {
  const auto dir = data_dir() / scene;
  httplib::MultipartFormDataItems items = {
      {"image", file_bytes(dir / "image.png"), "image.png", "image/png"},
      {"labels", file_bytes(dir / "labels.png"), "labels.png", "image/png"},
  };
  return c.Post("/sessions", items);
}

inline httplib::Result post_prompt(httplib::Client& c, const std::string& id, const std::string& text) {
  return c.Post("/sessions/" + id + "/prompts", nlohmann::json{{"text", text}}.dump(), "application/json");
}

/// Options whose sessions all answer from a fixture scene's mock script.
inline vloop::ServiceOptions scripted_options(const std::filesystem::path& store, const std::string& scene) {
  vloop::ServiceOptions o;
  o.store_dir = store;
  o.make_deps = [scene](const std::string&) {
    vloop::SessionDeps d;
    d.backend = std::make_shared<vloop::ScriptedMock>(vloop::ScriptedMock::load(data_dir() / scene / "script.json"));
    return d;
  };
  return o;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace vt
