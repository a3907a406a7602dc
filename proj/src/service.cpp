#include "vloop/service.hpp"

#include <condition_variable>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <shared_mutex>

#include <httplib.h>
#include <json.hpp>

#include "vloop/error.hpp"
#include "vloop/image_io.hpp"

namespace vloop {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kProblemType = "application/problem+json";

json problem(const Error& e) {
  return {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}, {"candidates", e.candidates()}};
}

json chat_json(const std::vector<ChatEntry>& entries, std::size_t begin = 0) {
  json out = json::array();
  for (std::size_t i = begin; i < entries.size(); ++i) out.push_back(to_json(entries[i]));
  return out;
}

json objects_json(const ObjectRegistry& registry) {
  json out = json::array();
  for (const auto& o : registry.entries()) out.push_back(to_json(o));
  return out;
}

std::string new_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::UnreadableFile, "cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

}  // namespace

int http_status(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnreadableFile:
    case ErrorKind::DimensionMismatch:
      return 400;
    case ErrorKind::NothingToUndo:
    case ErrorKind::NothingToRedo:
    case ErrorKind::HistoryLimit:
      return 409;
    case ErrorKind::UnknownObjectIndex:
    case ErrorKind::ObjectNotLive:
    case ErrorKind::EmptyMask:
    case ErrorKind::MaskCoversImage:
    case ErrorKind::UnknownColorName:
    case ErrorKind::EmptyText:
    case ErrorKind::EmptyPrompt:
    case ErrorKind::UnrecognizedAction:
    case ErrorKind::MissingParameter:
    case ErrorKind::AmbiguousReference:
    case ErrorKind::NoMatchingObject:
      return 422;
    case ErrorKind::BackendUnavailable:
    case ErrorKind::BackendRefused:
    case ErrorKind::UnmatchedScriptRequest:
    case ErrorKind::MissingIndexInResponse:
    case ErrorKind::MalformedResponse:
    case ErrorKind::SegmentationUnavailable:
      return 502;
    case ErrorKind::PreconditionViolation:
    case ErrorKind::MissingFixture:
      return 500;
  }
  return 500;
}

// --- store ---------------------------------------------------------------------

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

void SessionStore::save(const EditSession& session) const {
  const fs::path d = dir(session.id());
  fs::create_directories(d / "snapshots");
  if (!fs::exists(d / "original.png")) save_png(*session.original(), d / "original.png");
  if (!fs::exists(d / "labels.png")) save_label_map(session.labels(), d / "labels.png");
  for (std::size_t v = 1;; ++v) {
    const ImageRef image = session.image_at(v);
    if (!image) break;
    const fs::path p = d / "snapshots" / (digest(*image) + ".png");
    if (!fs::exists(p)) save_png(*image, p);
  }
  write_atomically(d / "transcript.json", to_json(session.transcript()).dump(2) + "\n");
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "transcript.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::unique_ptr<EditSession> SessionStore::load(const std::string& id, SessionDeps deps) const {
  const fs::path d = dir(id);
  const SessionTranscript t = load_transcript(d / "transcript.json");
  auto original = std::make_shared<const ImageBuffer>(load_image(d / "original.png"));
  auto snapshot = [&](const std::string& digest_hex) -> ImageRef {
    const fs::path p = d / "snapshots" / (digest_hex + ".png");
    if (!fs::exists(p)) return nullptr;
    return std::make_shared<const ImageBuffer>(load_image(p));
  };
  return EditSession::restore(t, original, load_label_map(d / "labels.png"), snapshot, std::move(deps));
}

void SessionStore::erase(const std::string& id) const { fs::remove_all(dir(id)); }

// --- service -------------------------------------------------------------------

namespace {

/// FIFO admission for one session's writers.
struct Slot {
  std::unique_ptr<EditSession> session;
  std::mutex m;
  std::condition_variable cv;
  std::uint64_t next_ticket = 0;
  std::uint64_t serving = 0;
  std::size_t pending = 0;
};

class Ticket {
 public:
  Ticket(Slot& slot, std::size_t limit) : slot_(slot) {
    std::unique_lock lock(slot_.m);
    if (slot_.pending >= limit) {
      throw Error(ErrorKind::HistoryLimit, "too many prompts are queued for this session");
    }
    const auto mine = slot_.next_ticket++;
    ++slot_.pending;
    slot_.cv.wait(lock, [&] { return slot_.serving == mine; });
  }
  ~Ticket() {
    {
      std::lock_guard lock(slot_.m);
      ++slot_.serving;
      --slot_.pending;
    }
    slot_.cv.notify_all();
  }
  Ticket(const Ticket&) = delete;
  Ticket& operator=(const Ticket&) = delete;

 private:
  Slot& slot_;
};

struct QueueFull {};

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  SessionStore store;
  httplib::Server server;
  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Slot>> sessions;

  explicit Impl(ServiceOptions o) : options(std::move(o)), store(options.store_dir) {
    for (const auto& id : store.list()) {
      try {
        auto slot = std::make_shared<Slot>();
        slot->session = store.load(id, deps_for(id));
        sessions.emplace(id, std::move(slot));
      } catch (const std::exception& e) {
        std::clog << "vloop: skipping stored session " << id << ": " << e.what() << '\n';
      }
    }
    routes();
  }

  SessionDeps deps_for(const std::string& id) const {
    SessionDeps deps = options.make_deps ? options.make_deps(id) : SessionDeps{};
    deps.wire_log = store.dir(id) / "wire.jsonl";
    return deps;
  }

  std::shared_ptr<Slot> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_problem(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kProblemType);
  }

  static void not_found(httplib::Response& res, const std::string& what) {
    send_problem(res, 404, {{"kind", "NotFound"}, {"message", what}, {"candidates", json::array()}});
  }

  template <typename F>
  static httplib::Server::Handler guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const QueueFull&) {
        send_problem(res, 409,
                     {{"kind", "QueueFull"}, {"message", "too many prompts are queued for this session"},
                      {"candidates", json::array()}});
      } catch (const Error& e) {
        send_problem(res, http_status(e.kind()), problem(e));
      } catch (const json::exception& e) {
        send_problem(res, 400, {{"kind", "InvalidArgument"}, {"message", e.what()}, {"candidates", json::array()}});
      } catch (const std::exception& e) {
        send_problem(res, 500, {{"kind", "Internal"}, {"message", e.what()}, {"candidates", json::array()}});
      }
    };
  }

  /// Runs a writer under the session's FIFO ticket and persists afterwards,
  /// whether or not the writer threw.
  template <typename F>
  void write(Slot& slot, F&& f) {
    std::unique_ptr<Ticket> ticket;
    try {
      ticket = std::make_unique<Ticket>(slot, options.queue_depth + 1);
    } catch (const Error&) {
      throw QueueFull{};
    }
    try {
      f(*slot.session);
    } catch (...) {
      store.save(*slot.session);
      throw;
    }
    store.save(*slot.session);
  }

  void routes() {
    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_file("image")) throw Error(ErrorKind::InvalidArgument, "the form needs an 'image' part");
      const std::string& bytes = req.get_file_value("image").content;
      auto image = std::make_shared<const ImageBuffer>(
          decode_image({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()}));
      std::optional<LabelMap> labels;
      if (req.has_file("labels")) {
        const std::string& lb = req.get_file_value("labels").content;
        labels = decode_label_map({reinterpret_cast<const std::uint8_t*>(lb.data()), lb.size()});
      }
      const std::string id = new_session_id();
      fs::create_directories(store.dir(id));
      std::unique_ptr<EditSession> session;
      try {
        session = EditSession::create(id, image, std::move(labels), deps_for(id), options.session);
        store.save(*session);
      } catch (...) {
        store.erase(id);
        throw;
      }
      const auto registry = session->registry();
      json body = {{"session_id", id},
                   {"width", image->width()},
                   {"height", image->height()},
                   {"general", session->initial_general()},
                   {"objects", objects_json(*registry)},
                   {"chat", chat_json(session->chat())}};
      auto slot = std::make_shared<Slot>();
      slot->session = std::move(session);
      {
        std::unique_lock lock(sessions_mutex);
        sessions.emplace(id, std::move(slot));
      }
      send_json(res, 201, body);
    }));

    server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      json ids = json::array();
      {
        std::shared_lock lock(sessions_mutex);
        for (const auto& [id, slot] : sessions) ids.push_back(id);
      }
      send_json(res, 200, {{"sessions", ids}});
    }));

    server.Post(R"(/sessions/([A-Za-z0-9_-]+)/prompts)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto slot = find(req.matches[1]);
                  if (!slot) return not_found(res, "unknown session");
                  std::string text = req.body;
                  if (req.get_header_value("Content-Type").find("json") != std::string::npos) {
                    text = json::parse(req.body).at("text").get<std::string>();
                  }
                  json body;
                  write(*slot, [&](EditSession& s) {
                    const PromptResult r = s.submit(text);
                    const auto chat = s.chat();
                    const std::size_t cursor = s.cursor();
                    body = {{"kind", std::string(to_string(r.kind))},
                            {"tier", std::string(to_string(r.tier))},
                            {"cursor", cursor},
                            {"chat", chat_json(chat, r.chat_begin)}};
                    if (r.kind == PromptKind::Question) {
                      body["answer"] = r.answer;
                    } else {
                      const auto history = s.history();
                      body["seq"] = r.seq;
                      body["verification"] = to_json(history[cursor - 1].verification);
                      body["versions"] = {{"before", cursor - 1}, {"after", cursor}, {"som", "som-current"}};
                    }
                  });
                  send_json(res, 200, body);
                }));

    for (const bool is_undo : {true, false}) {
      server.Post(is_undo ? R"(/sessions/([A-Za-z0-9_-]+)/undo)" : R"(/sessions/([A-Za-z0-9_-]+)/redo)",
                  guarded([this, is_undo](const httplib::Request& req, httplib::Response& res) {
                    auto slot = find(req.matches[1]);
                    if (!slot) return not_found(res, "unknown session");
                    json body;
                    write(*slot, [&](EditSession& s) {
                      const std::size_t begin = s.chat().size();
                      is_undo ? s.undo() : s.redo();
                      body = {{"cursor", s.cursor()},
                              {"current_version", s.cursor()},
                              {"general", s.current_general()},
                              {"objects", objects_json(*s.registry())},
                              {"chat", chat_json(s.chat(), begin)}};
                    });
                    send_json(res, 200, body);
                  }));
    }

    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/images/([A-Za-z0-9_-]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto slot = find(req.matches[1]);
                 if (!slot) return not_found(res, "unknown session");
                 const EditSession& s = *slot->session;
                 const std::string version = req.matches[2];
                 ImageBuffer image = ImageBuffer::filled(1, 1, {});
                 if (version == "som-current") {
                   image = s.som_current();
                 } else {
                   ImageRef ref;
                   if (version == "original") {
                     ref = s.original();
                   } else if (version == "current") {
                     ref = s.current_image();
                   } else if (version.find_first_not_of("0123456789") == std::string::npos && version.size() < 9) {
                     ref = s.image_at(std::stoul(version));
                   }
                   if (!ref) return not_found(res, "unknown image version '" + version + "'");
                   image = *ref;
                 }
                 const auto png = encode_png(image);
                 res.status = 200;
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
               }));

    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/chat)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto slot = find(req.matches[1]);
                 if (!slot) return not_found(res, "unknown session");
                 send_json(res, 200, {{"entries", chat_json(slot->session->chat())}});
               }));

    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/transcript)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto slot = find(req.matches[1]);
                 if (!slot) return not_found(res, "unknown session");
                 send_json(res, 200, to_json(slot->session->transcript()));
               }));
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::InvalidArgument, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

std::size_t Service::session_count() const {
  std::shared_lock lock(impl_->sessions_mutex);
  return impl_->sessions.size();
}

}  // namespace vloop
