#include "vloop/transcript.hpp"

#include <fstream>

#include "vloop/error.hpp"

namespace vloop {
namespace {

using nlohmann::json;

constexpr std::string_view kEventNames[] = {"edit", "question", "undo", "redo", "error"};

EventType event_type_from_string(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kEventNames); ++i) {
    if (kEventNames[i] == name) return static_cast<EventType>(i);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown event type '" + std::string(name) + "'");
}

RouteTier tier_from_string(const std::string& name) {
  if (name == "rules") return RouteTier::Rules;
  if (name == "backend") return RouteTier::Backend;
  throw Error(ErrorKind::InvalidArgument, "unknown route tier '" + name + "'");
}

json rgb_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }
Rgb rgb_from(const json& j) { return {j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()}; }

template <typename T, typename F>
json array_of(const std::vector<T>& items, F&& f) {
  json out = json::array();
  for (const auto& item : items) out.push_back(f(item));
  return out;
}

json event_json(const TranscriptEvent& e) {
  json out = {{"type", std::string(to_string(e.type))}, {"cursor_after", e.cursor_after}};
  switch (e.type) {
    case EventType::Edit:
      out["prompt"] = e.prompt;
      out["seq"] = e.seq;
      out["tier"] = std::string(to_string(e.tier));
      if (e.intent) out["intent"] = to_json(*e.intent);
      out["before_digest"] = e.before_digest;
      out["after_digest"] = e.after_digest;
      if (e.verification) out["verification"] = to_json(*e.verification);
      out["registry_after"] = array_of(e.registry_after, [](const ObjectEntry& o) { return to_json(o); });
      if (e.text) out["text"] = to_json(*e.text);
      break;
    case EventType::Question:
      out["prompt"] = e.prompt;
      out["tier"] = std::string(to_string(e.tier));
      out["answer"] = e.answer;
      break;
    case EventType::Undo:
    case EventType::Redo:
      out["seq"] = e.seq;
      break;
    case EventType::Error:
      out["prompt"] = e.prompt;
      out["error_kind"] = e.error_kind;
      out["error_message"] = e.error_message;
      out["candidates"] = e.candidates;
      break;
  }
  out["exchanges"] = array_of(e.exchanges, [](const WireRecord& r) { return to_json(r); });
  return out;
}

TranscriptEvent event_from(const json& j) {
  TranscriptEvent e;
  e.type = event_type_from_string(j.at("type").get<std::string>());
  e.cursor_after = j.at("cursor_after").get<std::size_t>();
  e.prompt = j.value("prompt", "");
  e.seq = j.value("seq", 0);
  if (j.contains("tier")) e.tier = tier_from_string(j.at("tier").get<std::string>());
  if (j.contains("intent")) e.intent = edit_intent_from_json(j.at("intent"));
  e.before_digest = j.value("before_digest", "");
  e.after_digest = j.value("after_digest", "");
  if (j.contains("verification")) e.verification = verification_bundle_from_json(j.at("verification"));
  for (const auto& o : j.value("registry_after", json::array())) e.registry_after.push_back(object_entry_from_json(o));
  if (j.contains("text")) e.text = text_placement_from_json(j.at("text"));
  e.answer = j.value("answer", "");
  e.error_kind = j.value("error_kind", "");
  e.error_message = j.value("error_message", "");
  e.candidates = j.value("candidates", std::vector<std::string>{});
  for (const auto& r : j.value("exchanges", json::array())) e.exchanges.push_back(wire_record_from_json(r));
  return e;
}

}  // namespace

std::string_view to_string(EventType type) noexcept { return kEventNames[static_cast<int>(type)]; }

std::size_t SessionTranscript::edit_count() const {
  std::size_t n = 0;
  for (const auto& e : events) n += e.type == EventType::Edit;
  return n;
}

bool operator==(const SessionTranscript& a, const SessionTranscript& b) { return to_json(a) == to_json(b); }

json to_json(const TextPlacement& p) {
  return {{"bbox", {p.bbox.x0, p.bbox.y0, p.bbox.x1, p.bbox.y1}},
          {"color", rgb_json(p.color)},
          {"outline", rgb_json(p.outline)},
          {"rendered_text", p.rendered_text},
          {"pixel_height", p.pixel_height}};
}

TextPlacement text_placement_from_json(const json& j) {
  TextPlacement p;
  const auto& b = j.at("bbox");
  p.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
  p.color = rgb_from(j.at("color"));
  p.outline = rgb_from(j.at("outline"));
  p.rendered_text = j.at("rendered_text").get<std::string>();
  p.pixel_height = j.at("pixel_height").get<int>();
  return p;
}

json to_json(const ObjectEntry& o) {
  return {{"index", o.index},
          {"description", o.description},
          {"status", o.status == ObjectStatus::Live ? "live" : "removed"}};
}

ObjectEntry object_entry_from_json(const json& j) {
  ObjectEntry o;
  o.index = j.at("index").get<int>();
  o.description = j.at("description").get<std::string>();
  const auto status = j.at("status").get<std::string>();
  if (status != "live" && status != "removed") {
    throw Error(ErrorKind::InvalidArgument, "unknown object status '" + status + "'");
  }
  o.status = status == "live" ? ObjectStatus::Live : ObjectStatus::Removed;
  return o;
}

WireRecord wire_record_from_json(const json& j) {
  WireRecord r;
  r.sequence = j.at("seq").get<std::size_t>();
  const auto kind = request_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorKind::InvalidArgument, "unknown request kind in transcript");
  r.kind = *kind;
  r.image_digests = j.at("images").get<std::vector<std::string>>();
  for (const auto& [name, value] : j.at("texts").items()) r.texts.push_back({name, value.get<std::string>()});
  r.response = j.value("response", "");
  r.error = j.value("error", "");
  r.violation = j.value("violation", "");
  return r;
}

json to_json(const SessionTranscript& t) {
  return {{"format", kTranscriptFormat},
          {"version", kTranscriptVersion},
          {"session_id", t.session_id},
          {"config", to_json(t.config)},
          {"width", t.width},
          {"height", t.height},
          {"original_digest", t.original_digest},
          {"labels_digest", t.labels_digest},
          {"initial_general", t.initial_general},
          {"initial_objects", array_of(t.initial_objects, [](const ObjectEntry& o) { return to_json(o); })},
          {"initial_exchanges", array_of(t.initial_exchanges, [](const WireRecord& r) { return to_json(r); })},
          {"events", array_of(t.events, event_json)},
          {"cursor", t.cursor},
          {"chat", array_of(t.chat, [](const ChatEntry& c) { return to_json(c); })}};
}

SessionTranscript transcript_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kTranscriptFormat) {
      throw Error(ErrorKind::InvalidArgument, "not a vloop transcript");
    }
    if (j.at("version").get<int>() != kTranscriptVersion) {
      throw Error(ErrorKind::InvalidArgument,
                  "unsupported transcript version " + std::to_string(j.at("version").get<int>()));
    }
    SessionTranscript t;
    t.session_id = j.at("session_id").get<std::string>();
    t.config = session_config_from_json(j.at("config"));
    t.width = j.at("width").get<int>();
    t.height = j.at("height").get<int>();
    t.original_digest = j.at("original_digest").get<std::string>();
    t.labels_digest = j.at("labels_digest").get<std::string>();
    t.initial_general = j.at("initial_general").get<std::string>();
    for (const auto& o : j.at("initial_objects")) t.initial_objects.push_back(object_entry_from_json(o));
    for (const auto& r : j.at("initial_exchanges")) t.initial_exchanges.push_back(wire_record_from_json(r));
    for (const auto& e : j.at("events")) t.events.push_back(event_from(e));
    t.cursor = j.at("cursor").get<std::size_t>();
    for (const auto& c : j.at("chat")) t.chat.push_back(chat_entry_from_json(c));
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed transcript: ") + e.what());
  }
}

void save_transcript(const SessionTranscript& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::UnreadableFile, "cannot write " + path.string());
  out << to_json(t).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::UnreadableFile, "failed writing " + path.string());
}

SessionTranscript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorKind::InvalidArgument, path.string() + " is not valid JSON");
  return transcript_from_json(doc);
}

}  // namespace vloop
