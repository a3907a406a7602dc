#include "vloop/replay.hpp"

#include "vloop/error.hpp"

namespace vloop {
namespace {

void add_exchanges(std::vector<ScriptedMock::Entry>& out, const std::vector<WireRecord>& records) {
  for (const auto& r : records) {
    ScriptedMock::Entry e;
    e.id = "seq-" + std::to_string(r.sequence);
    e.match.kind = r.kind;
    for (const auto& f : r.texts) {
      if (!f.value.empty()) e.match.contains.push_back(f.value);
    }
    if (!r.image_digests.empty()) e.match.image_digest = r.image_digests.front();
    if (r.error.empty()) {
      e.response = r.response;
    } else if (r.error == to_string(ErrorKind::BackendRefused)) {
      e.error = "refused";
    } else {
      e.error = "unavailable";
    }
    out.push_back(std::move(e));
  }
}

}  // namespace

ScriptedMock mock_from_transcript(const SessionTranscript& t) {
  std::vector<ScriptedMock::Entry> entries;
  add_exchanges(entries, t.initial_exchanges);
  for (const auto& ev : t.events) add_exchanges(entries, ev.exchanges);
  return ScriptedMock(std::move(entries));
}

ReplayReport replay_transcript(const SessionTranscript& t, ImageRef original, LabelMap labels, SessionDeps deps) {
  std::shared_ptr<ScriptedMock> own_mock;
  if (!deps.backend) {
    own_mock = std::make_shared<ScriptedMock>(mock_from_transcript(t));
    deps.backend = own_mock;
  }
  auto* scripted = dynamic_cast<ScriptedMock*>(deps.backend.get());

  ReplayReport report;
  auto session = EditSession::create(t.session_id, std::move(original), std::move(labels), std::move(deps), t.config);
  for (const auto& ev : t.events) {
    try {
      switch (ev.type) {
        case EventType::Undo: session->undo(); break;
        case EventType::Redo: session->redo(); break;
        default: session->submit(ev.prompt); break;
      }
    } catch (const Error&) {
      // Recorded failures are expected to recur; the event comparison below catches drift.
    }
  }

  const SessionTranscript got = session->transcript();
  std::vector<const TranscriptEvent*> got_edits;
  for (const auto& e : got.events) {
    if (e.type == EventType::Edit) got_edits.push_back(&e);
  }
  std::size_t k = 0;
  for (const auto& e : t.events) {
    if (e.type != EventType::Edit) continue;
    ReplayReport::EditCheck check{e.seq, e.after_digest, k < got_edits.size() ? got_edits[k]->after_digest : ""};
    if (!check.matches()) report.mismatches.push_back("edit #" + std::to_string(e.seq) + " image differs");
    report.edits.push_back(std::move(check));
    ++k;
  }
  if (got_edits.size() > k) report.mismatches.push_back("replay produced extra edits");

  report.events_match = got.events.size() == t.events.size();
  for (std::size_t i = 0; report.events_match && i < t.events.size(); ++i) {
    const auto& a = t.events[i];
    const auto& b = got.events[i];
    report.events_match = a.type == b.type && a.prompt == b.prompt && a.error_kind == b.error_kind;
  }
  if (!report.events_match) report.mismatches.push_back("event sequence differs");

  report.chat_matches = got.chat == t.chat;
  if (!report.chat_matches) report.mismatches.push_back("chat differs");
  report.cursor_matches = got.cursor == t.cursor;
  if (!report.cursor_matches) report.mismatches.push_back("cursor differs");
  if (scripted) {
    report.unmatched_requests = scripted->unmatched_requests();
    if (report.unmatched_requests) {
      report.mismatches.push_back(std::to_string(report.unmatched_requests) + " backend requests had no scripted answer");
    }
  }
  return report;
}

}  // namespace vloop
