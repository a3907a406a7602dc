#include <algorithm>
#include <cctype>
#include <fstream>

#include "vloop/backend.hpp"
#include "vloop/error.hpp"

namespace vloop {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

ScriptedMock::ScriptedMock(std::vector<Entry> entries)
    : entries_(std::move(entries)), consumed_(entries_.size(), false) {}

ScriptedMock::ScriptedMock(ScriptedMock&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  entries_ = std::move(other.entries_);
  consumed_ = std::move(other.consumed_);
  log_ = std::move(other.log_);
  unmatched_ = other.unmatched_;
}

ScriptedMock ScriptedMock::from_json(const nlohmann::json& script) {
  std::vector<Entry> entries;
  try {
    for (const auto& e : script.at("entries")) {
      Entry entry;
      const auto kind_name = e.at("kind").get<std::string>();
      const auto kind = request_kind_from_string(kind_name);
      if (!kind) throw Error(ErrorKind::InvalidArgument, "mock script: unknown request kind " + kind_name);
      entry.match.kind = *kind;
      if (e.contains("contains")) {
        if (e["contains"].is_string()) {
          entry.match.contains.push_back(e["contains"].get<std::string>());
        } else {
          entry.match.contains = e["contains"].get<std::vector<std::string>>();
        }
      }
      if (e.contains("images_identical")) entry.match.images_identical = e["images_identical"].get<bool>();
      if (e.contains("image_digest")) entry.match.image_digest = e["image_digest"].get<std::string>();
      entry.response = e.value("response", std::string{});
      if (e.contains("error")) entry.error = e["error"].get<std::string>();
      entry.repeat = e.value("repeat", false);
      entry.id = e.value("id", kind_name + "#" + std::to_string(entries.size() + 1));
      entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::InvalidArgument, std::string("mock script: ") + ex.what());
  }
  return ScriptedMock(std::move(entries));
}

ScriptedMock ScriptedMock::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFixture, "cannot open mock script " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, "mock script " + path.string() + ": " + e.what());
  }
}

bool ScriptedMock::matches(const Matcher& m, const BackendRequest& r) const {
  if (m.kind != r.kind) return false;
  if (!m.contains.empty()) {
    std::string haystack;
    for (const auto& f : r.texts) haystack += lower(f.value) + "\n";
    for (const auto& needle : m.contains) {
      if (haystack.find(lower(needle)) == std::string::npos) return false;
    }
  }
  if (m.images_identical) {
    const bool identical = r.images.size() == 2 && *r.images[0] == *r.images[1];
    if (identical != *m.images_identical) return false;
  }
  if (m.image_digest && (r.images.empty() || digest(*r.images[0]) != *m.image_digest)) return false;
  return true;
}

std::string ScriptedMock::complete(const BackendRequest& request) {
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (consumed_[i] || !matches(entries_[i].match, request)) continue;
    const Entry& e = entries_[i];
    if (!e.repeat) consumed_[i] = true;
    log_.push_back(e.id);
    if (e.error == "unavailable") throw Error(ErrorKind::BackendUnavailable, "scripted outage (" + e.id + ")");
    if (e.error == "refused") throw Error(ErrorKind::BackendRefused, "scripted refusal (" + e.id + ")");
    return e.response;
  }
  ++unmatched_;
  std::string detail;
  for (const auto& f : request.texts) detail += " " + f.name + "='" + f.value.substr(0, 60) + "'";
  throw Error(ErrorKind::UnmatchedScriptRequest,
              "no script entry matches " + std::string(to_string(request.kind)) + " request" + detail);
}

std::vector<std::string> ScriptedMock::consumption_log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t ScriptedMock::unmatched_requests() const {
  std::lock_guard lock(mutex_);
  return unmatched_;
}

std::size_t ScriptedMock::remaining() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!entries_[i].repeat && !consumed_[i]) ++n;
  }
  return n;
}

}  // namespace vloop
