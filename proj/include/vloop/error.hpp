#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vloop {

enum class ErrorKind {
  InvalidArgument,
  UnknownObjectIndex,
  ObjectNotLive,
  EmptyMask,
  MaskCoversImage,
  UnknownColorName,
  EmptyText,
  EmptyPrompt,
  UnrecognizedAction,
  MissingParameter,
  AmbiguousReference,
  NoMatchingObject,
  BackendUnavailable,
  BackendRefused,
  UnmatchedScriptRequest,
  MissingIndexInResponse,
  PreconditionViolation,
  SegmentationUnavailable,
  DimensionMismatch,
  UnreadableFile,
  MalformedResponse,
  NothingToUndo,
  NothingToRedo,
  HistoryLimit,
  MissingFixture,
};

std::string_view to_string(ErrorKind kind) noexcept;
ErrorKind error_kind_from_string(std::string_view name);

/// The single exception type thrown by the engine. `candidates` is filled for
/// reference-resolution failures so callers can read the options back to the user.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::vector<std::string> candidates = {})
      : std::runtime_error(message), kind_(kind), candidates_(std::move(candidates)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& candidates() const noexcept { return candidates_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> candidates_;
};

}  // namespace vloop
