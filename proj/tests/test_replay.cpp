#include <gtest/gtest.h>

#include "vloop/replay.hpp"
#include "walkthrough.hpp"

using namespace vloop;

namespace {

ReplayReport replay_fixture(const std::string& scene, const std::string& file) {
  const auto dir = vt::data_dir() / scene;
  const auto t = load_transcript(dir / file);
  auto image = std::make_shared<const ImageBuffer>(load_image(dir / "image.png"));
  return replay_transcript(t, image, load_label_map(dir / "labels.png"), SessionDeps{});
}

}  // namespace

TEST(Walkthrough, HeadingsMarkersAndLocality) {
  const auto run = vt::run_scene("cats", "walkthrough.txt");
  const auto& s = *run.session;
  ASSERT_EQ(s.history().size(), 5u);
  EXPECT_EQ(run.mock->unmatched_requests(), 0u);

  std::vector<std::string> h1, h2;
  for (const auto& e : s.chat()) {
    if (e.heading_level == 1) h1.push_back(e.text);
    if (e.heading_level == 2) h2.push_back(e.text);
  }
  ASSERT_EQ(h1.size(), 5u);
  ASSERT_EQ(h2.size(), 20u);
  const char* titles[] = {"Summary of Visual Changes", "AI Judgement", "Updated General Description",
                          "Updated Object Descriptions"};
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(h1[k], "Verification Output of Edit #" + std::to_string(k + 1) + " starts from here");
    for (int j = 0; j < 4; ++j) EXPECT_EQ(h2[k * 4 + j], "[#" + std::to_string(k + 1) + "] " + titles[j]);
  }

  const auto first = s.history().front().verification;
  EXPECT_EQ(format_object_list({first.objects[1]}), "Object 2: [removed]");

  const auto history = s.history();
  const auto& original = *s.original();
  const auto& final_image = *s.current_image();
  const auto allowed = vt::write_region(history, original.width(), original.height());
  const std::size_t outside = vt::changes_outside(
      original, final_image, [&](int x, int y) { return allowed[static_cast<std::size_t>(y) * original.width() + x]; });
  EXPECT_EQ(outside, 0u);
  EXPECT_NE(original, final_image);
}

TEST(Walkthrough, DeterministicAcrossRuns) {
  const auto a = vt::run_scene("cats", "walkthrough.txt");
  const auto b = vt::run_scene("cats", "walkthrough.txt");
  EXPECT_EQ(digest(*a.session->current_image()), digest(*b.session->current_image()));
  EXPECT_EQ(a.session->chat(), b.session->chat());
}

TEST(Walkthrough, QuestionsInterleaveWithEdits) {
  const auto run = vt::run_scene("cats", "walkthrough_questions.txt");
  const auto t = run.session->transcript();
  EXPECT_EQ(t.edit_count(), 5u);
  std::vector<std::string> answers;
  for (const auto& e : t.events) {
    if (e.type == EventType::Question) answers.push_back(e.answer);
  }
  EXPECT_EQ(answers, (std::vector<std::string>{"One.", "Cream or white", "Center Right.", "No", "Yes."}));
}

TEST(Grounding, ZeroViolationsAcrossAllFixtureSessions) {
  for (const auto& [scene, file] : {std::pair{"cats", "walkthrough_questions.txt"}, {"dog", "session.txt"},
                                    {"bathroom", "session.txt"}}) {
    const auto run = vt::run_scene(scene, file);
    auto& rec = run.session->recorder();
    EXPECT_EQ(rec.violations(), 0u) << scene;
    for (const auto& r : rec.records()) {
      std::size_t images = r.image_digests.size();
      switch (r.kind) {
        case RequestKind::SummaryOfChanges:
          EXPECT_EQ(images, 2u);
          EXPECT_TRUE(r.texts.empty());
          break;
        case RequestKind::GeneralDescription:
        case RequestKind::ObjectDescriptions:
          EXPECT_EQ(images, 1u);
          break;
        case RequestKind::Judgement:
          EXPECT_EQ(images, 2u);
          EXPECT_EQ(r.texts.size(), 5u);
          break;
        default:
          break;
      }
    }
  }
}

TEST(Replay, CommittedTranscriptsReproduce) {
  for (const auto& [scene, file] : {std::pair{"cats", "walkthrough.transcript.json"},
                                    {"dog", "session.transcript.json"}, {"bathroom", "session.transcript.json"}}) {
    const auto report = replay_fixture(scene, file);
    EXPECT_TRUE(report.ok()) << scene << ": " << (report.mismatches.empty() ? "" : report.mismatches.front());
    EXPECT_EQ(report.edits.size(), 5u);
    for (const auto& e : report.edits) EXPECT_TRUE(e.matches()) << scene << " #" << e.seq;
  }
}

TEST(Replay, ScriptMockAgreesWithTranscript) {
  const auto dir = vt::data_dir() / "cats";
  const auto t = load_transcript(dir / "walkthrough.transcript.json");
  SessionDeps deps;
  deps.backend = std::make_shared<ScriptedMock>(ScriptedMock::load(dir / "script.json"));
  const auto report = replay_transcript(t, std::make_shared<const ImageBuffer>(load_image(dir / "image.png")),
                                        load_label_map(dir / "labels.png"), deps);
  EXPECT_TRUE(report.ok());
}

TEST(Replay, TamperedDigestIsReported) {
  const auto dir = vt::data_dir() / "cats";
  auto t = load_transcript(dir / "walkthrough.transcript.json");
  for (auto& e : t.events) {
    if (e.type == EventType::Edit && e.seq == 3) e.after_digest = std::string(64, '0');
  }
  const auto report = replay_transcript(t, std::make_shared<const ImageBuffer>(load_image(dir / "image.png")),
                                        load_label_map(dir / "labels.png"), SessionDeps{});
  EXPECT_FALSE(report.ok());
  ASSERT_EQ(report.edits.size(), 5u);
  EXPECT_FALSE(report.edits[2].matches());
  EXPECT_TRUE(report.edits[0].matches());
}
