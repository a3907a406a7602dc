#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vloop/backend.hpp"
#include "vloop/chat.hpp"
#include "vloop/config.hpp"
#include "vloop/edit_ops.hpp"
#include "vloop/error.hpp"
#include "vloop/feedback.hpp"
#include "vloop/registry.hpp"
#include "vloop/router.hpp"
#include "vloop/segmentation.hpp"
#include "vloop/transcript.hpp"

namespace vloop {

struct EditRecord {
  int seq = 0;
  std::string prompt;
  EditIntent intent;
  RouteTier tier = RouteTier::Rules;
  ImageRef image_before;
  ImageRef image_after;
  std::shared_ptr<const ObjectRegistry> registry_before;
  std::shared_ptr<const ObjectRegistry> registry_after;
  VerificationBundle verification;
  std::optional<TextPlacement> text;
  /// General description of image_after; the previous one when regeneration failed.
  std::string general_after;
};

struct SessionDeps {
  std::shared_ptr<VisionBackend> backend;
  std::shared_ptr<const InpaintStrategy> inpaint;  // baseline when null
  std::shared_ptr<const SegmentationProvider> segmentation;
  std::optional<std::filesystem::path> wire_log;
};

struct PromptResult {
  PromptKind kind = PromptKind::Question;
  RouteTier tier = RouteTier::Rules;
  std::string answer;     // questions
  int seq = 0;            // edits
  std::size_t chat_begin = 0;  // first chat entry this prompt added
};

/// One editing loop. Writers (prompts, undo, redo) are serialized; readers get
/// copies of immutable snapshots and never wait on backend calls.
class EditSession {
 public:
  /// Describes the image and its objects. Throws SegmentationUnavailable when
  /// neither labels nor a provider are given, and backend errors.
  static std::unique_ptr<EditSession> create(std::string id, ImageRef image, std::optional<LabelMap> labels,
                                             SessionDeps deps, SessionConfig config = {});

  /// Rebuilds a session from its transcript and stored snapshots without any
  /// backend calls. `snapshot` maps an image digest to its stored image.
  static std::unique_ptr<EditSession> restore(const SessionTranscript& transcript, ImageRef original,
                                              LabelMap labels, const std::function<ImageRef(const std::string&)>& snapshot,
                                              SessionDeps deps);

  /// Routes and executes one prompt. Errors are added to the chat and rethrown;
  /// image, registry and history stay unchanged.
  PromptResult submit(std::string_view prompt);

  /// Applies a parsed intent directly. An empty prompt gets a generated instruction.
  EditRecord apply_edit(const EditIntent& intent, std::string prompt = {}, RouteTier tier = RouteTier::Rules);

  /// Throws NothingToUndo / NothingToRedo.
  void undo();
  void redo();

  const std::string& id() const noexcept { return id_; }
  const SessionConfig& config() const noexcept { return config_; }
  ImageRef original() const { return original_; }
  const LabelMap& labels() const { return *labels_; }

  ImageRef current_image() const;
  std::shared_ptr<const ObjectRegistry> registry() const;
  std::vector<EditRecord> history() const;
  std::size_t cursor() const;
  std::vector<ChatEntry> chat() const;
  std::string current_general() const;
  std::string initial_general() const;
  /// Image for history position `version` (0 = original, up to history size).
  ImageRef image_at(std::size_t version) const;
  ImageBuffer som_current() const;

  RecordingBackend& recorder() { return *recorder_; }
  SessionTranscript transcript() const;

 private:
  EditSession(std::string id, ImageRef image, std::shared_ptr<const LabelMap> labels, SessionDeps deps,
              SessionConfig config);

  struct State {
    std::vector<EditRecord> history;
    std::size_t cursor = 0;
    std::vector<ChatEntry> chat;
    std::vector<TranscriptEvent> events;
  };

  EditRecord apply_locked(const EditIntent& intent, std::string prompt, RouteTier tier, std::size_t chat_begin);
  std::vector<WireRecord> take_exchanges();
  void record_error(std::string_view prompt, const Error& error);
  ImageRef current_locked() const;
  std::shared_ptr<const ObjectRegistry> registry_locked() const;

  std::string id_;
  SessionConfig config_;
  ImageRef original_;
  std::shared_ptr<const LabelMap> labels_;
  std::shared_ptr<RecordingBackend> recorder_;
  std::shared_ptr<const InpaintStrategy> inpaint_;
  std::shared_ptr<const ObjectRegistry> initial_registry_;
  std::string initial_general_;
  std::vector<WireRecord> initial_exchanges_;
  std::size_t exchanges_taken_ = 0;
  std::size_t exchange_seq_ = 0;

  std::mutex writer_;
  mutable std::mutex state_mutex_;
  State state_;
};

}  // namespace vloop
