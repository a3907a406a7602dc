#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "vloop/backend.hpp"
#include "vloop/edit_ops.hpp"
#include "vloop/segmentation.hpp"

namespace vloop {

struct SessionConfig {
  EditConfig edit;
  std::size_t max_edits = 50;
  /// Route through the backend first; the rules are always the fallback.
  bool router_use_backend = false;
  std::string inpaint = "baseline";  // or "remote"
  std::string inpaint_endpoint;
  int inpaint_timeout_ms = 60000;
};

nlohmann::json to_json(const SessionConfig& config);
SessionConfig session_config_from_json(const nlohmann::json& doc);

struct BackendSettings {
  std::string type = "mock";  // "mock" or "remote"
  std::optional<std::filesystem::path> mock_script;
  RemoteBackendConfig remote;
  std::optional<std::filesystem::path> templates;  // builtin when empty
};

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t queue_depth = 4;
};

/// Everything a CLI or service process needs; read from a JSON file and then
/// overridden by flags.
struct AppConfig {
  SessionConfig session;
  BackendSettings backend;
  std::optional<std::string> segmentation_endpoint;
  ServiceSettings service;

  static AppConfig from_json(const nlohmann::json& doc);
  static AppConfig load(const std::filesystem::path& path);
};

/// Builds the configured backend. Paths in the config are used as given.
std::shared_ptr<VisionBackend> make_backend(const BackendSettings& settings);
std::shared_ptr<const InpaintStrategy> make_inpaint(const SessionConfig& config);
std::shared_ptr<const SegmentationProvider> make_segmentation(const AppConfig& config);

}  // namespace vloop
