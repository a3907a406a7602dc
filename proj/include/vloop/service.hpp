#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vloop/session.hpp"

namespace vloop {

/// On-disk session directory: original.png, labels.png, snapshots/<digest>.png,
/// transcript.json and wire.jsonl.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path dir(const std::string& id) const { return root_ / id; }

  /// Writes new snapshots, then the transcript (atomically).
  void save(const EditSession& session) const;
  std::vector<std::string> list() const;
  std::unique_ptr<EditSession> load(const std::string& id, SessionDeps deps) const;
  void erase(const std::string& id) const;

 private:
  std::filesystem::path root_;
};

struct ServiceOptions {
  std::filesystem::path store_dir;
  std::size_t queue_depth = 4;  // prompts waiting behind the one in flight
  SessionConfig session;
  /// Backend, inpainting and segmentation for one session. The service fills in the wire log.
  std::function<SessionDeps(const std::string& session_id)> make_deps;
};

/// HTTP front end over a SessionStore. Sessions found in the store are
/// restored on construction without backend calls.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to `host`; port 0 picks a free one. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status for an error kind (400, 404, 409, 422, 500 or 502).
int http_status(ErrorKind kind) noexcept;

}  // namespace vloop
