#include <cstdlib>
#include <fstream>

#include "http_client.hpp"
#include "vloop/backend.hpp"
#include "vloop/error.hpp"
#include "vloop/image_io.hpp"

namespace vloop {
namespace {

constexpr const char* kBuiltinTemplates =
#include "vloop_builtin_templates.inc"
    ;

}  // namespace

PromptTemplates PromptTemplates::from_json(const nlohmann::json& doc) {
  PromptTemplates out;
  try {
    out.version_ = doc.at("version").get<int>();
    for (const auto& [name, t] : doc.at("templates").items()) {
      const auto kind = request_kind_from_string(name);
      if (!kind) throw Error(ErrorKind::InvalidArgument, "template file: unknown request kind " + name);
      out.templates_.emplace_back(*kind, Template{t.value("system", std::string{}), t.at("user").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("template file: ") + e.what());
  }
  return out;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFixture, "cannot open prompt templates " + path.string());
  return from_json(nlohmann::json::parse(in));
}

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates templates = from_json(nlohmann::json::parse(kBuiltinTemplates));
  return templates;
}

const PromptTemplates::Template& PromptTemplates::get(RequestKind kind) const {
  for (const auto& [k, t] : templates_) {
    if (k == kind) return t;
  }
  throw Error(ErrorKind::InvalidArgument, "no prompt template for " + std::string(to_string(kind)));
}

std::string PromptTemplates::render_user(const BackendRequest& request) const {
  std::string text = get(request.kind).user;
  for (const auto& f : request.texts) {
    const std::string key = "{{" + f.name + "}}";
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + f.value.size())) {
      text.replace(pos, key.size(), f.value);
    }
  }
  return text;
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config, PromptTemplates templates)
    : config_(std::move(config)), templates_(std::move(templates)) {}

nlohmann::json RemoteBackend::build_body(const BackendRequest& request) const {
  nlohmann::json content = nlohmann::json::array();
  content.push_back({{"type", "text"}, {"text", templates_.render_user(request)}});
  for (const auto& img : request.images) {
    content.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:image/png;base64," + base64_encode(encode_png(*img))}}}});
  }
  nlohmann::json messages = nlohmann::json::array();
  const auto& system = templates_.get(request.kind).system;
  if (!system.empty()) messages.push_back({{"role", "system"}, {"content", system}});
  messages.push_back({{"role", "user"}, {"content", content}});
  return {{"model", config_.model}, {"temperature", config_.temperature}, {"messages", messages}};
}

std::string RemoteBackend::complete(const BackendRequest& request) {
  if (auto v = grounding_violation(request)) throw Error(ErrorKind::PreconditionViolation, *v);
  const nlohmann::json body = build_body(request);

  detail::HttpOptions options;
  options.timeout_ms = config_.timeout_ms;
  options.retries = config_.retries;
  options.backoff_ms = config_.backoff_ms;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    options.headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  auto log = [&](const nlohmann::json& entry) {
    if (!config_.wire_log) return;
    std::lock_guard lock(log_mutex_);
    std::ofstream out(*config_.wire_log, std::ios::app);
    out << entry.dump() << '\n';
  };
  // Images are logged by digest; the key only ever travels in the header.
  nlohmann::json logged = body;
  std::size_t image_no = 0;
  for (auto& part : logged["messages"].back()["content"]) {
    if (part["type"] == "image_url") part["image_url"]["url"] = "sha256:" + digest(*request.images[image_no++]);
  }

  const auto response = detail::http_post(config_.endpoint, body.dump(), "application/json", options);
  log({{"request", logged}, {"status", response.status}, {"response", response.body}});
  if (response.status >= 400) {
    throw Error(ErrorKind::BackendRefused, "backend answered HTTP " + std::to_string(response.status) + ": " +
                                               response.body.substr(0, 200));
  }
  try {
    const auto parsed = nlohmann::json::parse(response.body);
    const auto& message = parsed.at("choices").at(0).at("message");
    if (message.contains("refusal") && message["refusal"].is_string()) {
      throw Error(ErrorKind::BackendRefused, "backend refused: " + message["refusal"].get<std::string>());
    }
    return message.at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedResponse, std::string("chat completion reply: ") + e.what());
  }
}

}  // namespace vloop
