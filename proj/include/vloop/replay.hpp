#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vloop/backend.hpp"
#include "vloop/session.hpp"
#include "vloop/transcript.hpp"

namespace vloop {

/// A mock that answers exactly the exchanges a transcript recorded, matched by
/// kind, first image digest and every text field.
ScriptedMock mock_from_transcript(const SessionTranscript& transcript);

struct ReplayReport {
  struct EditCheck {
    int seq = 0;
    std::string expected_digest;
    std::string actual_digest;
    bool matches() const { return expected_digest == actual_digest; }
  };
  std::vector<EditCheck> edits;
  bool chat_matches = false;
  bool cursor_matches = false;
  bool events_match = false;  // same event types, prompts and error kinds
  std::size_t unmatched_requests = 0;
  std::vector<std::string> mismatches;

  bool ok() const { return mismatches.empty(); }
};

/// Re-runs every prompt, undo and redo of `transcript` against `deps` and
/// compares the outcome. When deps.backend is null the transcript's own
/// exchanges are served by `mock_from_transcript`.
ReplayReport replay_transcript(const SessionTranscript& transcript, ImageRef original, LabelMap labels,
                               SessionDeps deps);

}  // namespace vloop
