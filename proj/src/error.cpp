#include "vloop/error.hpp"

#include <array>
#include <utility>

namespace vloop {
namespace {

constexpr std::array<std::pair<ErrorKind, std::string_view>, 25> kNames{{
    {ErrorKind::InvalidArgument, "InvalidArgument"},
    {ErrorKind::UnknownObjectIndex, "UnknownObjectIndex"},
    {ErrorKind::ObjectNotLive, "ObjectNotLive"},
    {ErrorKind::EmptyMask, "EmptyMask"},
    {ErrorKind::MaskCoversImage, "MaskCoversImage"},
    {ErrorKind::UnknownColorName, "UnknownColorName"},
    {ErrorKind::EmptyText, "EmptyText"},
    {ErrorKind::EmptyPrompt, "EmptyPrompt"},
    {ErrorKind::UnrecognizedAction, "UnrecognizedAction"},
    {ErrorKind::MissingParameter, "MissingParameter"},
    {ErrorKind::AmbiguousReference, "AmbiguousReference"},
    {ErrorKind::NoMatchingObject, "NoMatchingObject"},
    {ErrorKind::BackendUnavailable, "BackendUnavailable"},
    {ErrorKind::BackendRefused, "BackendRefused"},
    {ErrorKind::UnmatchedScriptRequest, "UnmatchedScriptRequest"},
    {ErrorKind::MissingIndexInResponse, "MissingIndexInResponse"},
    {ErrorKind::PreconditionViolation, "PreconditionViolation"},
    {ErrorKind::SegmentationUnavailable, "SegmentationUnavailable"},
    {ErrorKind::DimensionMismatch, "DimensionMismatch"},
    {ErrorKind::UnreadableFile, "UnreadableFile"},
    {ErrorKind::MalformedResponse, "MalformedResponse"},
    {ErrorKind::NothingToUndo, "NothingToUndo"},
    {ErrorKind::NothingToRedo, "NothingToRedo"},
    {ErrorKind::HistoryLimit, "HistoryLimit"},
    {ErrorKind::MissingFixture, "MissingFixture"},
}};

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

ErrorKind error_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown error kind: " + std::string(name));
}

}  // namespace vloop
