#include "vloop/config.hpp"

#include <fstream>

#include "vloop/error.hpp"

namespace vloop {

nlohmann::json to_json(const SessionConfig& c) {
  return {{"edit",
           {{"blur_sigma_min", c.edit.blur_sigma_min},
            {"blur_sigma_divisor", c.edit.blur_sigma_divisor},
            {"brightness_step", c.edit.brightness_step},
            {"dilation_radius", c.edit.dilation_radius},
            {"text_size_fraction", c.edit.text_size_fraction},
            {"text_min_fraction", c.edit.text_min_fraction},
            {"text_margin_fraction", c.edit.text_margin_fraction}}},
          {"max_edits", c.max_edits},
          {"router_use_backend", c.router_use_backend},
          {"inpaint", c.inpaint},
          {"inpaint_endpoint", c.inpaint_endpoint},
          {"inpaint_timeout_ms", c.inpaint_timeout_ms}};
}

SessionConfig session_config_from_json(const nlohmann::json& doc) {
  SessionConfig c;
  try {
    if (doc.contains("edit")) {
      const auto& e = doc["edit"];
      c.edit.blur_sigma_min = e.value("blur_sigma_min", c.edit.blur_sigma_min);
      c.edit.blur_sigma_divisor = e.value("blur_sigma_divisor", c.edit.blur_sigma_divisor);
      c.edit.brightness_step = e.value("brightness_step", c.edit.brightness_step);
      c.edit.dilation_radius = e.value("dilation_radius", c.edit.dilation_radius);
      c.edit.text_size_fraction = e.value("text_size_fraction", c.edit.text_size_fraction);
      c.edit.text_min_fraction = e.value("text_min_fraction", c.edit.text_min_fraction);
      c.edit.text_margin_fraction = e.value("text_margin_fraction", c.edit.text_margin_fraction);
    }
    c.max_edits = doc.value("max_edits", c.max_edits);
    c.router_use_backend = doc.value("router_use_backend", c.router_use_backend);
    c.inpaint = doc.value("inpaint", c.inpaint);
    c.inpaint_endpoint = doc.value("inpaint_endpoint", c.inpaint_endpoint);
    c.inpaint_timeout_ms = doc.value("inpaint_timeout_ms", c.inpaint_timeout_ms);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("session config: ") + e.what());
  }
  if (c.edit.brightness_step < 0 || c.edit.dilation_radius < 0 || c.edit.blur_sigma_divisor <= 0) {
    throw Error(ErrorKind::InvalidArgument, "session config: edit parameters out of range");
  }
  if (c.inpaint != "baseline" && c.inpaint != "remote") {
    throw Error(ErrorKind::InvalidArgument, "session config: inpaint must be 'baseline' or 'remote'");
  }
  return c;
}

AppConfig AppConfig::from_json(const nlohmann::json& doc) {
  AppConfig c;
  try {
    if (doc.contains("session")) c.session = session_config_from_json(doc["session"]);
    if (doc.contains("backend")) {
      const auto& b = doc["backend"];
      c.backend.type = b.value("type", c.backend.type);
      if (b.contains("mock_script")) c.backend.mock_script = b["mock_script"].get<std::string>();
      if (b.contains("templates")) c.backend.templates = b["templates"].get<std::string>();
      auto& r = c.backend.remote;
      r.endpoint = b.value("endpoint", r.endpoint);
      r.model = b.value("model", r.model);
      r.api_key_env = b.value("api_key_env", r.api_key_env);
      r.timeout_ms = b.value("timeout_ms", r.timeout_ms);
      r.retries = b.value("retries", r.retries);
      r.backoff_ms = b.value("backoff_ms", r.backoff_ms);
      r.temperature = b.value("temperature", r.temperature);
      if (b.contains("wire_log")) r.wire_log = b["wire_log"].get<std::string>();
    }
    if (doc.contains("segmentation") && doc["segmentation"].contains("endpoint")) {
      c.segmentation_endpoint = doc["segmentation"]["endpoint"].get<std::string>();
    }
    if (doc.contains("service")) {
      const auto& s = doc["service"];
      c.service.host = s.value("host", c.service.host);
      c.service.port = s.value("port", c.service.port);
      c.service.queue_depth = s.value("queue_depth", c.service.queue_depth);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  if (c.backend.type != "mock" && c.backend.type != "remote") {
    throw Error(ErrorKind::InvalidArgument, "config: backend.type must be 'mock' or 'remote'");
  }
  return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open config " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, "config " + path.string() + ": " + e.what());
  }
}

std::shared_ptr<VisionBackend> make_backend(const BackendSettings& s) {
  if (s.type == "remote") {
    if (s.remote.endpoint.empty()) throw Error(ErrorKind::InvalidArgument, "remote backend needs an endpoint");
    return std::make_shared<RemoteBackend>(s.remote,
                                           s.templates ? PromptTemplates::load(*s.templates) : PromptTemplates::builtin());
  }
  if (!s.mock_script) throw Error(ErrorKind::InvalidArgument, "mock backend needs a script (--mock-script)");
  return std::make_shared<ScriptedMock>(ScriptedMock::load(*s.mock_script));
}

std::shared_ptr<const InpaintStrategy> make_inpaint(const SessionConfig& c) {
  if (c.inpaint == "remote") {
    return std::make_shared<RemoteInpaint>(c.inpaint_endpoint, c.inpaint_timeout_ms);
  }
  return std::make_shared<BaselineInpaint>();
}

std::shared_ptr<const SegmentationProvider> make_segmentation(const AppConfig& c) {
  if (!c.segmentation_endpoint) return nullptr;
  return std::make_shared<RemoteSegmentation>(*c.segmentation_endpoint);
}

}  // namespace vloop
