#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vloop/backend.hpp"
#include "vloop/edit_ops.hpp"
#include "vloop/registry.hpp"

namespace vloop {

enum class PromptKind { Question, Edit };
enum class RouteTier { Rules, Backend };

std::string_view to_string(PromptKind kind) noexcept;
std::string_view to_string(RouteTier tier) noexcept;

struct ObjectRef {
  enum class Kind { None, ByIndex, ByName };
  Kind kind = Kind::None;
  int index = 0;
  std::string name;

  static ObjectRef none() { return {}; }
  static ObjectRef by_index(int n) { return {Kind::ByIndex, n, {}}; }
  static ObjectRef by_name(std::string text) { return {Kind::ByName, 0, std::move(text)}; }
  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};

std::string describe(const ObjectRef& ref);

struct EditIntent {
  EditAction action;
  ObjectRef object_ref;
  std::optional<int> resolved_index;
  friend bool operator==(const EditIntent&, const EditIntent&) = default;
};

nlohmann::json to_json(const EditIntent& intent);
EditIntent edit_intent_from_json(const nlohmann::json& doc);

struct RoutedPrompt {
  PromptKind kind = PromptKind::Question;
  std::string raw_text;
  std::optional<EditIntent> intent;
  RouteTier tier = RouteTier::Rules;
};

/// Word lists that drive the rule-based router. Loaded from data so new
/// phrasings extend by configuration; `builtin()` is the shipped file.
struct VerbLexicon {
  struct ActionCues {
    ActionKind action;
    std::vector<std::vector<std::string>> cues;  // each cue is a token sequence
    std::vector<std::string> requires_any;
    bool quote_counts_as_noun = false;
    std::vector<std::string> color_verbs;
  };

  int version = 0;
  std::vector<std::string> interrogatives;
  std::vector<std::string> courtesy_words;
  std::vector<ActionCues> actions;  // priority order
  std::vector<std::string> generic_edit_verbs;
  std::vector<std::string> unsupported_verbs;
  std::vector<std::vector<std::string>> darker;
  std::vector<std::vector<std::string>> brighter;
  std::vector<std::string> multi_action_separators;
  std::vector<std::string> reference_boundaries;
  std::vector<std::string> stop_words;
  std::vector<std::string> relational_words;
  std::map<std::string, std::vector<std::string>> positional_words;  // left/right/top/bottom
  std::vector<std::vector<std::string>> synonyms;
  std::map<std::string, std::vector<std::string>> anchor_words;  // top/bottom/left/right/center
  std::vector<std::string> anchor_fillers;
  std::vector<std::string> text_object_prepositions;

  static VerbLexicon from_json(const nlohmann::json& doc);
  static VerbLexicon load(const std::filesystem::path& path);
  static const VerbLexicon& builtin();
};

struct RouterOptions {
  /// When set, classification and name resolution go to the backend first and
  /// fall back to the rules if it fails.
  VisionBackend* backend = nullptr;
  const VerbLexicon* lexicon = nullptr;  // builtin() when null
};

/// Throws EmptyPrompt.
PromptKind classify_prompt(std::string_view text, const RouterOptions& options = {});

/// Parses action, parameters and object reference, then resolves the reference.
/// Throws UnrecognizedAction, MissingParameter, and the resolution errors.
EditIntent parse_edit_intent(std::string_view text, const ObjectRegistry& registry,
                             const RouterOptions& options = {});

/// Throws UnknownObjectIndex, ObjectNotLive, AmbiguousReference, NoMatchingObject.
int resolve_object_reference(const ObjectRef& ref, const ObjectRegistry& registry,
                             const RouterOptions& options = {});

/// Classification plus intent parsing. The tier is Backend only when every
/// backend call the route needed succeeded.
RoutedPrompt route_prompt(std::string_view text, const ObjectRegistry& registry, const RouterOptions& options = {});

}  // namespace vloop
