#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vloop/image.hpp"
#include "vloop/registry.hpp"

namespace vloop {

enum class RequestKind {
  GeneralDescription,
  ObjectDescriptions,
  AnswerQuestion,
  SummaryOfChanges,
  Judgement,
  Classify,
  ResolveReference,
};

std::string_view to_string(RequestKind kind) noexcept;
std::optional<RequestKind> request_kind_from_string(std::string_view name);

struct TextField {
  std::string name;
  std::string value;
};

/// One call to the vision-language backend. Which images and text fields a
/// request may carry is fixed per kind; see `grounding_violation`.
struct BackendRequest {
  RequestKind kind;
  std::vector<ImageRef> images;
  std::vector<TextField> texts;

  const std::string* text(std::string_view name) const;
};

/// Describes what is wrong with the request's image/text cardinality, or
/// nothing when the request obeys its kind's grounding contract.
std::optional<std::string> grounding_violation(const BackendRequest& request);

class VisionBackend {
 public:
  virtual ~VisionBackend() = default;
  /// Throws BackendUnavailable, BackendRefused, or UnmatchedScriptRequest.
  virtual std::string complete(const BackendRequest& request) = 0;
};

// Text field names.
namespace field {
inline constexpr std::string_view kIndices = "indices";
inline constexpr std::string_view kQuestion = "question";
inline constexpr std::string_view kInstruction = "instruction";
inline constexpr std::string_view kPreviousGeneral = "previous_general";
inline constexpr std::string_view kPreviousObjects = "previous_objects";
inline constexpr std::string_view kNewGeneral = "new_general";
inline constexpr std::string_view kNewObjects = "new_objects";
inline constexpr std::string_view kPrompt = "prompt";
inline constexpr std::string_view kReference = "reference";
inline constexpr std::string_view kObjects = "objects";
}  // namespace field

// --- typed operations ---------------------------------------------------------

std::string general_description(VisionBackend& backend, ImageRef image);

struct ObjectDescription {
  int index = 0;
  std::string text;
  friend bool operator==(const ObjectDescription&, const ObjectDescription&) = default;
};

/// Asks for one description per live index over the SoM overlay. Throws
/// MissingIndexInResponse if any live index is absent from the reply.
std::vector<ObjectDescription> object_descriptions(VisionBackend& backend, ImageRef som_image,
                                                   const std::vector<int>& live_indices);

/// Parses "Object 3: text" style lines.
std::vector<ObjectDescription> parse_object_lines(std::string_view response);
std::string format_object_lines(const std::vector<ObjectDescription>& objects);

std::string summary_of_changes(VisionBackend& backend, ImageRef before, ImageRef after);

struct JudgementContext {
  ImageRef before;
  ImageRef after;
  std::string previous_general;
  std::string previous_objects;
  std::string new_general;
  std::string new_objects;
  std::string instruction;
};

std::string judgement(VisionBackend& backend, const JudgementContext& context);

std::string answer_question(VisionBackend& backend, ImageRef image, std::string_view question);

/// Returns true for an edit instruction.
bool classify_with_backend(VisionBackend& backend, std::string_view prompt);

/// Backend-chosen object index, or nullopt when it reports no match.
std::optional<int> resolve_with_backend(VisionBackend& backend, std::string_view reference,
                                        const ObjectRegistry& registry);

// --- scripted mock ------------------------------------------------------------

/// Replays canned responses. Each request consumes the first unconsumed entry
/// whose matcher accepts it; an unmatched request is an error, never improvised.
class ScriptedMock final : public VisionBackend {
 public:
  struct Matcher {
    RequestKind kind;
    std::vector<std::string> contains;  // case-insensitive, searched across all text fields
    std::optional<bool> images_identical;
    std::optional<std::string> image_digest;  // digest of the first image
  };
  struct Entry {
    std::string id;
    Matcher match;
    std::string response;
    std::optional<std::string> error;  // "unavailable" or "refused"
    bool repeat = false;               // stays available after matching
  };

  explicit ScriptedMock(std::vector<Entry> entries);
  ScriptedMock(ScriptedMock&& other) noexcept;
  static ScriptedMock from_json(const nlohmann::json& script);
  static ScriptedMock load(const std::filesystem::path& path);

  std::string complete(const BackendRequest& request) override;

  std::vector<std::string> consumption_log() const;
  std::size_t unmatched_requests() const;
  /// Non-repeat entries not yet consumed.
  std::size_t remaining() const;

 private:
  bool matches(const Matcher& m, const BackendRequest& r) const;

  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  std::vector<bool> consumed_;
  std::vector<std::string> log_;
  std::size_t unmatched_ = 0;
};

// --- recording wrapper ----------------------------------------------------------

struct WireRecord {
  std::size_t sequence = 0;
  RequestKind kind = RequestKind::GeneralDescription;
  std::vector<std::string> image_digests;
  std::vector<TextField> texts;
  std::string response;
  std::string error;      // error kind name, empty on success
  std::string violation;  // grounding violation, empty when clean
};

nlohmann::json to_json(const WireRecord& record);

/// Forwards to an inner backend, checking the grounding contract on every
/// call and keeping a wire log. Violating requests are rejected with
/// PreconditionViolation before they reach the inner backend.
class RecordingBackend final : public VisionBackend {
 public:
  explicit RecordingBackend(std::shared_ptr<VisionBackend> inner,
                            std::optional<std::filesystem::path> log_path = std::nullopt);

  std::string complete(const BackendRequest& request) override;

  std::vector<WireRecord> records() const;
  std::size_t violations() const;
  VisionBackend& inner() { return *inner_; }

 private:
  std::shared_ptr<VisionBackend> inner_;
  std::optional<std::filesystem::path> log_path_;
  mutable std::mutex mutex_;
  std::vector<WireRecord> records_;
  std::size_t violations_ = 0;
};

// --- remote chat-completions client ------------------------------------------

/// Per-kind prompt wording, loaded from a versioned template file.
class PromptTemplates {
 public:
  struct Template {
    std::string system;
    std::string user;  // {{field}} placeholders are substituted from text fields
  };

  static PromptTemplates load(const std::filesystem::path& path);
  static PromptTemplates from_json(const nlohmann::json& doc);
  /// The shipped data/prompt_templates.json.
  static const PromptTemplates& builtin();

  const Template& get(RequestKind kind) const;
  int version() const noexcept { return version_; }
  std::string render_user(const BackendRequest& request) const;

 private:
  int version_ = 0;
  std::vector<std::pair<RequestKind, Template>> templates_;
};

struct RemoteBackendConfig {
  std::string endpoint;  // full chat-completions URL
  std::string model;
  std::string api_key_env = "VLOOP_API_KEY";
  int timeout_ms = 60000;
  int retries = 2;
  int backoff_ms = 500;
  double temperature = 0.0;
  std::optional<std::filesystem::path> wire_log;
};

class RemoteBackend final : public VisionBackend {
 public:
  RemoteBackend(RemoteBackendConfig config, PromptTemplates templates);

  std::string complete(const BackendRequest& request) override;

  /// Request body for `request`; exposed for wire-format tests.
  nlohmann::json build_body(const BackendRequest& request) const;

 private:
  RemoteBackendConfig config_;
  PromptTemplates templates_;
  std::mutex log_mutex_;
};

}  // namespace vloop
