#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vloop/backend.hpp"
#include "vloop/chat.hpp"
#include "vloop/config.hpp"
#include "vloop/edit_ops.hpp"
#include "vloop/feedback.hpp"
#include "vloop/registry.hpp"
#include "vloop/router.hpp"

namespace vloop {

inline constexpr std::string_view kTranscriptFormat = "vloop-transcript";
inline constexpr int kTranscriptVersion = 1;

enum class EventType { Edit, Question, Undo, Redo, Error };

std::string_view to_string(EventType type) noexcept;

/// One session event. Which fields are meaningful depends on the type; see
/// docs/transcript_schema.md.
struct TranscriptEvent {
  EventType type = EventType::Edit;
  std::string prompt;
  int seq = 0;  // edit number made, undone or redone
  RouteTier tier = RouteTier::Rules;
  std::optional<EditIntent> intent;
  std::string before_digest;
  std::string after_digest;
  std::optional<VerificationBundle> verification;
  std::vector<ObjectEntry> registry_after;
  std::optional<TextPlacement> text;
  std::string answer;
  std::string error_kind;
  std::string error_message;
  std::vector<std::string> candidates;
  std::size_t cursor_after = 0;
  std::vector<WireRecord> exchanges;
};

struct SessionTranscript {
  std::string session_id;
  SessionConfig config;
  int width = 0;
  int height = 0;
  std::string original_digest;
  std::string labels_digest;
  std::string initial_general;
  std::vector<ObjectEntry> initial_objects;
  std::vector<WireRecord> initial_exchanges;
  std::vector<TranscriptEvent> events;
  std::size_t cursor = 0;
  std::vector<ChatEntry> chat;

  std::size_t edit_count() const;
  friend bool operator==(const SessionTranscript& a, const SessionTranscript& b);
};

nlohmann::json to_json(const SessionTranscript& transcript);
/// Throws InvalidArgument on a wrong format name, version, or shape.
SessionTranscript transcript_from_json(const nlohmann::json& doc);

void save_transcript(const SessionTranscript& transcript, const std::filesystem::path& path);
SessionTranscript load_transcript(const std::filesystem::path& path);

nlohmann::json to_json(const TextPlacement& placement);
TextPlacement text_placement_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ObjectEntry& entry);
ObjectEntry object_entry_from_json(const nlohmann::json& doc);
WireRecord wire_record_from_json(const nlohmann::json& doc);

}  // namespace vloop
