#include "vloop/chat.hpp"

#include <sstream>

#include "vloop/error.hpp"

namespace vloop {

nlohmann::json to_json(const ChatEntry& e) {
  nlohmann::json out = {{"author", e.author == Author::User ? "user" : "system"}, {"text", e.text}};
  out["heading_level"] = e.heading_level ? nlohmann::json(*e.heading_level) : nlohmann::json(nullptr);
  out["linked_edit_seq"] = e.linked_edit_seq ? nlohmann::json(*e.linked_edit_seq) : nlohmann::json(nullptr);
  return out;
}

ChatEntry chat_entry_from_json(const nlohmann::json& doc) {
  try {
    ChatEntry e;
    e.author = doc.at("author").get<std::string>() == "user" ? Author::User : Author::System;
    e.text = doc.at("text").get<std::string>();
    if (!doc.at("heading_level").is_null()) e.heading_level = doc["heading_level"].get<int>();
    if (doc.contains("linked_edit_seq") && !doc["linked_edit_seq"].is_null()) {
      e.linked_edit_seq = doc["linked_edit_seq"].get<int>();
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::InvalidArgument, std::string("chat entry: ") + ex.what());
  }
}

std::vector<ChatEntry> format_chat_entries(int seq, const VerificationBundle& bundle) {
  const std::string tag = "[#" + std::to_string(seq) + "] ";
  std::vector<ChatEntry> out;
  auto heading = [&](int level, std::string text) {
    out.push_back({level, Author::System, std::move(text), seq});
  };
  auto body = [&](std::string text) { out.push_back({std::nullopt, Author::System, std::move(text), seq}); };

  heading(1, "Verification Output of Edit #" + std::to_string(seq) + " starts from here");
  heading(2, tag + std::string(kSummaryTitle));
  body(bundle.summary);
  heading(2, tag + std::string(kJudgementTitle));
  body(bundle.judgement);
  heading(2, tag + std::string(kGeneralTitle));
  body(bundle.general);
  heading(2, tag + std::string(kObjectsTitle));
  if (bundle.objects_note) body(*bundle.objects_note);
  if (bundle.objects.empty()) body("No objects were segmented in this image.");
  for (const auto& o : bundle.objects) body(format_object_list({o}));
  return out;
}

std::string render_chat_text(const std::vector<ChatEntry>& entries) {
  std::ostringstream out;
  for (const auto& e : entries) {
    if (e.heading_level) {
      out << std::string(static_cast<std::size_t>(*e.heading_level), '#') << ' ' << e.text << '\n';
    } else if (e.author == Author::User) {
      out << "> " << e.text << '\n';
    } else {
      out << e.text << '\n';
    }
  }
  return out.str();
}

}  // namespace vloop
