// vloop: run an editing session in the terminal, replay a transcript, or serve HTTP.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "vloop/config.hpp"
#include "vloop/error.hpp"
#include "vloop/image_io.hpp"
#include "vloop/replay.hpp"
#include "vloop/service.hpp"
#include "vloop/session.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kMismatch = 2, kBackend = 3 };

struct Common {
  std::optional<fs::path> image;
  std::optional<fs::path> labels;
  std::optional<fs::path> mock_script;
  std::optional<fs::path> backend_config;
  std::optional<fs::path> store;
  std::optional<std::string> remote;
  std::optional<double> blur_sigma_min;
  std::optional<double> blur_sigma_divisor;
  std::optional<int> brightness_step;
  std::optional<int> dilation_radius;
  std::optional<std::size_t> max_edits;
  bool router_backend = false;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("--mock-script", c.mock_script, "Scripted backend responses (JSON)");
  cmd.add_option("--backend-config", c.backend_config, "Application config (JSON)");
  cmd.add_option("--blur-sigma-min", c.blur_sigma_min, "Smallest blur sigma");
  cmd.add_option("--blur-sigma-divisor", c.blur_sigma_divisor, "Blur sigma = mask extent / divisor");
  cmd.add_option("--brightness-step", c.brightness_step, "Per-channel brightness change");
  cmd.add_option("--dilation-radius", c.dilation_radius, "Remove fill-region dilation");
  cmd.add_option("--max-edits", c.max_edits, "History bound");
  cmd.add_flag("--router-backend", c.router_backend, "Ask the backend to classify and ground prompts first");
}

vloop::AppConfig app_config(const Common& c) {
  vloop::AppConfig config = c.backend_config ? vloop::AppConfig::load(*c.backend_config) : vloop::AppConfig{};
  if (c.mock_script) {
    config.backend.type = "mock";
    config.backend.mock_script = *c.mock_script;
  }
  auto& e = config.session.edit;
  if (c.blur_sigma_min) e.blur_sigma_min = *c.blur_sigma_min;
  if (c.blur_sigma_divisor) e.blur_sigma_divisor = *c.blur_sigma_divisor;
  if (c.brightness_step) e.brightness_step = *c.brightness_step;
  if (c.dilation_radius) e.dilation_radius = *c.dilation_radius;
  if (c.max_edits) config.session.max_edits = *c.max_edits;
  if (c.router_backend) config.session.router_use_backend = true;
  return config;
}

vloop::SessionDeps make_deps(const vloop::AppConfig& config) {
  vloop::SessionDeps deps;
  deps.backend = vloop::make_backend(config.backend);
  deps.inpaint = vloop::make_inpaint(config.session);
  deps.segmentation = vloop::make_segmentation(config);
  return deps;
}

bool is_backend_failure(vloop::ErrorKind kind) { return vloop::http_status(kind) == 502; }

void print_new(const std::vector<vloop::ChatEntry>& chat, std::size_t begin) {
  std::vector<vloop::ChatEntry> fresh;
  for (std::size_t i = begin; i < chat.size(); ++i) {
    if (chat[i].author == vloop::Author::System) fresh.push_back(chat[i]);
  }
  if (!fresh.empty()) std::cout << vloop::render_chat_text(fresh) << std::flush;
}

int read_loop(std::istream& in, const std::function<bool(const std::string&)>& handle) {
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    if (!handle(line.substr(first, last - first + 1))) break;
  }
  return kOk;
}

// --- in-process run --------------------------------------------------------------

int run_local(const Common& c, const std::optional<fs::path>& prompts, const std::optional<fs::path>& transcript_out) {
  const vloop::AppConfig config = app_config(c);
  std::unique_ptr<vloop::EditSession> session;
  try {
    auto image = std::make_shared<const vloop::ImageBuffer>(vloop::load_image(*c.image));
    std::optional<vloop::LabelMap> labels;
    if (c.labels) labels = vloop::from_fixture(*c.labels, *image);
    session = vloop::EditSession::create("cli", image, std::move(labels), make_deps(config), config.session);
  } catch (const vloop::Error& e) {
    std::cerr << "vloop: " << vloop::to_string(e.kind()) << ": " << e.what() << '\n';
    return is_backend_failure(e.kind()) ? kBackend : kUsage;
  }
  print_new(session->chat(), 0);

  auto save_transcript = [&] {
    if (transcript_out) vloop::save_transcript(session->transcript(), *transcript_out);
  };
  auto handle = [&](const std::string& line) {
    if (line == ":quit") return false;
    try {
      if (line == ":undo" || line == ":redo") {
        const std::size_t begin = session->chat().size();
        line == ":undo" ? session->undo() : session->redo();
        print_new(session->chat(), begin);
      } else if (line.rfind(":save", 0) == 0) {
        std::string path = line.substr(5);
        path.erase(0, path.find_first_not_of(' '));
        if (path.empty()) {
          std::cout << "usage: :save <path>\n";
        } else {
          vloop::save_png(*session->current_image(), path);
          std::cout << "saved " << path << '\n';
        }
      } else if (line[0] == ':') {
        std::cout << "unknown command " << line << " (:undo, :redo, :save <path>, :quit)\n";
      } else {
        std::cout << "> " << line << '\n';
        const std::size_t begin = session->chat().size();
        try {
          session->submit(line);
        } catch (const vloop::Error&) {
          // The session already put the error into the chat.
        }
        print_new(session->chat(), begin);
      }
    } catch (const vloop::Error& e) {
      std::cout << vloop::to_string(e.kind()) << ": " << e.what() << '\n';
    }
    save_transcript();
    return true;
  };

  if (prompts) {
    std::ifstream in(*prompts);
    if (!in) {
      std::cerr << "vloop: cannot open " << *prompts << '\n';
      return kUsage;
    }
    read_loop(in, handle);
  } else {
    read_loop(std::cin, handle);
  }
  save_transcript();
  return kOk;
}

// --- run against a service ---------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vloop::Error(vloop::ErrorKind::UnreadableFile, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

void print_entries(const json& entries) {
  std::vector<vloop::ChatEntry> chat;
  for (const auto& e : entries) chat.push_back(vloop::chat_entry_from_json(e));
  print_new(chat, 0);
}

int run_remote(const Common& c, const std::optional<fs::path>& prompts, const std::optional<fs::path>& transcript_out) {
  httplib::Client client(*c.remote);
  client.set_read_timeout(600, 0);
  httplib::MultipartFormDataItems form = {{"image", read_file(*c.image), c.image->filename().string(), "image/png"}};
  if (c.labels) form.push_back({"labels", read_file(*c.labels), c.labels->filename().string(), "image/png"});
  auto created = client.Post("/sessions", form);
  if (!created) {
    std::cerr << "vloop: cannot reach " << *c.remote << '\n';
    return kBackend;
  }
  if (created->status != 201) {
    std::cerr << "vloop: " << created->body << '\n';
    return created->status == 502 ? kBackend : kUsage;
  }
  const json session = json::parse(created->body);
  const std::string base = "/sessions/" + session.at("session_id").get<std::string>();
  print_entries(session.at("chat"));

  auto handle = [&](const std::string& line) {
    if (line == ":quit") return false;
    httplib::Result res;
    if (line == ":undo" || line == ":redo") {
      res = client.Post(base + (line == ":undo" ? "/undo" : "/redo"));
    } else if (line.rfind(":save", 0) == 0) {
      std::string path = line.substr(5);
      path.erase(0, path.find_first_not_of(' '));
      res = client.Get(base + "/images/current");
      if (res && res->status == 200 && !path.empty()) {
        std::ofstream(path, std::ios::binary) << res->body;
        std::cout << "saved " << path << '\n';
        return true;
      }
    } else {
      std::cout << "> " << line << '\n';
      res = client.Post(base + "/prompts", json{{"text", line}}.dump(), "application/json");
    }
    if (!res) {
      std::cout << "service unreachable\n";
    } else if (res->status == 200) {
      print_entries(json::parse(res->body).at("chat"));
    } else {
      const json problem = json::parse(res->body, nullptr, false);
      if (problem.is_object()) {
        std::cout << problem.value("kind", "Error") << ": " << problem.value("message", "") << '\n';
      } else {
        std::cout << "HTTP " << res->status << '\n';
      }
      // Routing errors also land in the chat; show the service's wording.
      if (res->status == 422) {
        if (auto chat = client.Get(base + "/chat"); chat && chat->status == 200) {
          const auto entries = json::parse(chat->body).at("entries");
          if (!entries.empty()) std::cout << entries.back().at("text").get<std::string>() << '\n';
        }
      }
    }
    return true;
  };
  if (prompts) {
    std::ifstream in(*prompts);
    read_loop(in, handle);
  } else {
    read_loop(std::cin, handle);
  }
  if (transcript_out) {
    if (auto t = client.Get(base + "/transcript"); t && t->status == 200) {
      std::ofstream(*transcript_out, std::ios::binary) << json::parse(t->body).dump(2) << '\n';
    }
  }
  return kOk;
}

// --- replay --------------------------------------------------------------------------

int replay(const Common& c, const fs::path& transcript_path) {
  vloop::SessionTranscript transcript;
  std::shared_ptr<const vloop::ImageBuffer> image;
  std::optional<vloop::LabelMap> labels;
  try {
    transcript = vloop::load_transcript(transcript_path);
    for (const auto* p : {&c.image, &c.labels}) {
      if (!*p || !fs::exists(**p)) {
        throw vloop::Error(vloop::ErrorKind::MissingFixture,
                           "replay needs --image and --labels files" + (*p ? ": " + (*p)->string() + " is missing" : std::string()));
      }
    }
    image = std::make_shared<const vloop::ImageBuffer>(vloop::load_image(*c.image));
    labels = vloop::from_fixture(*c.labels, *image);
    if (vloop::digest(*image) != transcript.original_digest || vloop::digest(*labels) != transcript.labels_digest) {
      throw vloop::Error(vloop::ErrorKind::MissingFixture, "the image or label map is not the one the transcript was recorded on");
    }
  } catch (const vloop::Error& e) {
    std::cerr << "vloop: " << vloop::to_string(e.kind()) << ": " << e.what() << '\n';
    return kUsage;
  }

  vloop::SessionDeps deps;
  if (c.mock_script || c.backend_config) deps = make_deps(app_config(c));
  deps.inpaint = vloop::make_inpaint(transcript.config);
  vloop::ReplayReport report;
  try {
    report = vloop::replay_transcript(transcript, image, std::move(*labels), std::move(deps));
  } catch (const vloop::Error& e) {
    std::cerr << "vloop: replay failed: " << vloop::to_string(e.kind()) << ": " << e.what() << '\n';
    return is_backend_failure(e.kind()) ? kBackend : kMismatch;
  }
  std::size_t passed = 0;
  for (const auto& edit : report.edits) {
    passed += edit.matches();
    std::cout << "edit #" << edit.seq << ": " << (edit.matches() ? "pass" : "FAIL");
    if (!edit.matches()) std::cout << " (expected " << edit.expected_digest << ", got " << edit.actual_digest << ")";
    std::cout << '\n';
  }
  std::cout << passed << "/" << report.edits.size() << " edit digests match\n";
  for (const auto& m : report.mismatches) std::cout << "mismatch: " << m << '\n';
  std::cout << (report.ok() ? "replay passed" : "replay FAILED") << '\n';
  return report.ok() ? kOk : kMismatch;
}

// --- serve -------------------------------------------------------------------------

vloop::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int serve(const Common& c, const std::string& host, int port, std::size_t queue_depth) {
  const vloop::AppConfig config = app_config(c);
  vloop::ServiceOptions options;
  options.store_dir = c.store ? *c.store : fs::path("vloop-store");
  options.queue_depth = queue_depth ? queue_depth : config.service.queue_depth;
  options.session = config.session;
  options.make_deps = [config](const std::string&) { return make_deps(config); };
  vloop::Service service(options);
  const int bound = service.bind(host.empty() ? config.service.host : host, port >= 0 ? port : config.service.port);
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on " << (host.empty() ? config.service.host : host) << ":" << bound << " with "
            << service.session_count() << " stored sessions" << std::endl;
  service.run();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-language image editing with textual verification"};
  app.require_subcommand(1);

  Common run_opts;
  std::optional<fs::path> prompts;
  std::optional<fs::path> transcript_out;
  auto* run = app.add_subcommand("run", "Interactive session (:undo, :redo, :save <path>, :quit)");
  run->add_option("--image", run_opts.image, "Input image")->required()->check(CLI::ExistingFile);
  run->add_option("--labels", run_opts.labels, "Label map (16-bit PNG)")->check(CLI::ExistingFile);
  run->add_option("--prompts", prompts, "Read prompts from a file instead of stdin");
  run->add_option("--transcript-out", transcript_out, "Write the session transcript here");
  run->add_option("--remote", run_opts.remote, "Use a running service at this URL");
  add_common(*run, run_opts);

  Common replay_opts;
  fs::path transcript_path;
  auto* rep = app.add_subcommand("replay", "Re-run a transcript and verify every edit digest");
  rep->add_option("transcript", transcript_path, "Transcript file")->required()->check(CLI::ExistingFile);
  rep->add_option("--image", replay_opts.image, "Input image");
  rep->add_option("--labels", replay_opts.labels, "Label map");
  add_common(*rep, replay_opts);

  Common serve_opts;
  std::string host;
  int port = -1;
  std::size_t queue_depth = 0;
  auto* srv = app.add_subcommand("serve", "HTTP service");
  srv->add_option("--host", host, "Listen address");
  srv->add_option("--port", port, "Listen port (0 picks one)");
  srv->add_option("--store", serve_opts.store, "Session store directory");
  srv->add_option("--queue-depth", queue_depth, "Prompts allowed to wait per session");
  add_common(*srv, serve_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      return run_opts.remote ? run_remote(run_opts, prompts, transcript_out)
                             : run_local(run_opts, prompts, transcript_out);
    }
    if (*rep) return replay(replay_opts, transcript_path);
    return serve(serve_opts, host, port, queue_depth);
  } catch (const vloop::Error& e) {
    std::cerr << "vloop: " << vloop::to_string(e.kind()) << ": " << e.what() << '\n';
    return is_backend_failure(e.kind()) ? kBackend : kUsage;
  } catch (const std::exception& e) {
    std::cerr << "vloop: " << e.what() << '\n';
    return kUsage;
  }
}
