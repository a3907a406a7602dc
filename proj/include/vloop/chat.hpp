#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vloop/feedback.hpp"

namespace vloop {

enum class Author { User, System };

struct ChatEntry {
  std::optional<int> heading_level;  // 1, 2, or none for body text
  Author author = Author::System;
  std::string text;
  std::optional<int> linked_edit_seq;
  friend bool operator==(const ChatEntry&, const ChatEntry&) = default;
};

nlohmann::json to_json(const ChatEntry& entry);
ChatEntry chat_entry_from_json(const nlohmann::json& doc);

/// One level-1 heading, then the four level-2 headings each followed by body entries.
std::vector<ChatEntry> format_chat_entries(int seq, const VerificationBundle& bundle);

/// Plain-text rendering with markdown-style heading markers.
std::string render_chat_text(const std::vector<ChatEntry>& entries);

}  // namespace vloop
