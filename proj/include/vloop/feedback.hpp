#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vloop/backend.hpp"
#include "vloop/image.hpp"
#include "vloop/registry.hpp"

namespace vloop {

inline constexpr std::string_view kSummaryTitle = "Summary of Visual Changes";
inline constexpr std::string_view kJudgementTitle = "AI Judgement";
inline constexpr std::string_view kGeneralTitle = "Updated General Description";
inline constexpr std::string_view kObjectsTitle = "Updated Object Descriptions";

/// One row of the objects part; an empty text means the object was removed.
struct ObjectLine {
  int index = 0;
  std::optional<std::string> text;
  friend bool operator==(const ObjectLine&, const ObjectLine&) = default;
};

/// The four verification texts for one edit.
struct VerificationBundle {
  std::string summary;
  std::string judgement;
  std::string general;
  std::vector<ObjectLine> objects;
  /// Set when the objects part could not be regenerated or was not requested.
  std::optional<std::string> objects_note;
  /// Parts that fell back to an "unavailable" marker: summary, judgement, general, objects.
  std::vector<std::string> degraded;

  bool is_degraded(std::string_view part) const;
  friend bool operator==(const VerificationBundle&, const VerificationBundle&) = default;
};

nlohmann::json to_json(const VerificationBundle& bundle);
VerificationBundle verification_bundle_from_json(const nlohmann::json& doc);

/// "Object 1: ...\nObject 2: [removed]".
std::string format_object_list(const std::vector<ObjectLine>& objects);
/// Every registry index, with removed entries marked.
std::vector<ObjectLine> object_lines(const ObjectRegistry& registry);

struct VerificationRequest {
  ImageRef before;
  ImageRef after;
  /// Registry after the edit: liveness decides which objects are described.
  const ObjectRegistry* registry = nullptr;
  std::string previous_general;
  std::string previous_objects;
  std::string instruction;
  /// False when the edit targeted no object; previous descriptions carry over.
  bool describe_objects = true;
};

/// Summary, general and objects run concurrently; judgement runs after them
/// because it reads the new descriptions. A failed part becomes a marker text.
VerificationBundle generate_verification(const VerificationRequest& request, VisionBackend& backend);

}  // namespace vloop
