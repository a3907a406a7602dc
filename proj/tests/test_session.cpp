#include <gtest/gtest.h>

#include <map>

#include "random_session.hpp"
#include "vloop/session.hpp"

using namespace vloop;

namespace {

std::string current_digest(const EditSession& s) { return digest(*s.current_image()); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(UndoRedo, AlgebraOverRandomSessions) {
  std::mt19937 rng(31337);
  auto backend = std::make_shared<vt::EchoBackend>();
  for (int trial = 0; trial < 200; ++trial) {
    auto s = vt::random_session(rng, backend);
    const std::string original = current_digest(*s);
    std::vector<std::string> digests{original};
    const int edits = vt::uniform(rng, 1, 20);
    for (int i = 0; i < edits; ++i) {
      if (vt::try_edit(rng, *s)) digests.push_back(current_digest(*s));
    }
    const std::size_t n = digests.size() - 1;
    ASSERT_EQ(s->cursor(), n);

    const int k = vt::uniform(rng, 0, static_cast<int>(n));
    for (int i = 0; i < k; ++i) s->undo();
    ASSERT_EQ(current_digest(*s), digests[n - k]);
    for (int i = 0; i < k; ++i) s->redo();
    ASSERT_EQ(current_digest(*s), digests[n]);

    for (std::size_t i = 0; i < n; ++i) s->undo();
    ASSERT_EQ(*s->current_image(), *s->original());
    ASSERT_EQ(*s->registry(), ObjectRegistry(s->registry()->labels_ptr(), s->transcript().initial_objects));
    EXPECT_EQ(kind_of([&] { s->undo(); }), ErrorKind::NothingToUndo);

    if (n > 0) {
      const int keep = vt::uniform(rng, 0, static_cast<int>(n) - 1);
      for (int i = 0; i < keep; ++i) s->redo();
      if (vt::try_edit(rng, *s)) {
        EXPECT_EQ(s->history().size(), static_cast<std::size_t>(keep) + 1);
        EXPECT_EQ(kind_of([&] { s->redo(); }), ErrorKind::NothingToRedo);
      }
    }
  }
}

TEST(Session, InitialDescriptionsSeedChat) {
  std::mt19937 rng(1);
  auto s = vt::random_session(rng, std::make_shared<vt::EchoBackend>());
  const auto chat = s->chat();
  ASSERT_GE(chat.size(), 2u);
  EXPECT_EQ(chat[0].text.rfind("Initial general description: scene ", 0), 0u);
  EXPECT_EQ(s->registry()->find(s->registry()->live_indices().front())->description.rfind("item ", 0), 0u);
  EXPECT_EQ(s->cursor(), 0u);
  EXPECT_EQ(s->recorder().violations(), 0u);
}

TEST(Session, EditAddsFiveHeadingsAndRemovedMarker) {
  std::mt19937 rng(2);
  auto s = vt::random_session(rng, std::make_shared<vt::EchoBackend>());
  const int target = s->registry()->live_indices().front();
  const auto before = s->chat().size();
  s->apply_edit({EditAction{RemoveParams{}}, ObjectRef::by_index(target), target});
  const auto chat = s->chat();
  int h1 = 0, h2 = 0;
  bool marker = false;
  for (std::size_t i = before; i < chat.size(); ++i) {
    h1 += chat[i].heading_level == 1;
    h2 += chat[i].heading_level == 2;
    marker |= chat[i].text == "Object " + std::to_string(target) + ": [removed]";
  }
  EXPECT_EQ(h1, 1);
  EXPECT_EQ(h2, 4);
  EXPECT_TRUE(marker);
  EXPECT_FALSE(s->registry()->is_live(target));
  EXPECT_EQ(s->history().back().prompt, "Remove object " + std::to_string(target) + ".");
  EXPECT_EQ(kind_of([&] { s->apply_edit({EditAction{BlurParams{}}, ObjectRef::by_index(target), target}); }),
            ErrorKind::ObjectNotLive);
}

TEST(Session, FailedPromptChangesNothingButChat) {
  std::mt19937 rng(3);
  auto s = vt::random_session(rng, std::make_shared<vt::EchoBackend>());
  const auto digest_before = current_digest(*s);
  const auto registry_before = *s->registry();
  const auto chat_before = s->chat().size();
  EXPECT_EQ(kind_of([&] { s->submit("rotate object 1 by ninety degrees"); }), ErrorKind::UnrecognizedAction);
  EXPECT_EQ(kind_of([&] { s->submit("blur object 99"); }), ErrorKind::UnknownObjectIndex);
  EXPECT_EQ(current_digest(*s), digest_before);
  EXPECT_EQ(*s->registry(), registry_before);
  EXPECT_EQ(s->history().size(), 0u);
  const auto chat = s->chat();
  ASSERT_EQ(chat.size(), chat_before + 4);
  EXPECT_EQ(chat[chat_before + 1].text.rfind("Error (UnrecognizedAction): ", 0), 0u);
  const auto t = s->transcript();
  ASSERT_EQ(t.events.size(), 2u);
  EXPECT_EQ(t.events[0].type, EventType::Error);
  EXPECT_EQ(t.events[1].error_kind, "UnknownObjectIndex");
}

TEST(Session, QuestionsLeaveImageAlone) {
  std::mt19937 rng(4);
  auto backend = std::make_shared<vt::EchoBackend>();
  auto s = vt::random_session(rng, backend);
  const auto r = s->submit("How many objects are in the image?");
  EXPECT_EQ(r.kind, PromptKind::Question);
  EXPECT_EQ(r.answer, "answer about " + current_digest(*s).substr(0, 8));
  EXPECT_EQ(s->chat().back().text, r.answer);
  EXPECT_EQ(s->history().size(), 0u);
}

TEST(Session, HistoryLimitEnforced) {
  std::mt19937 rng(5);
  SessionConfig config;
  config.max_edits = 2;
  auto s = vt::random_session(rng, std::make_shared<vt::EchoBackend>(), config);
  const EditIntent text{EditAction{AddTextParams{"x", Anchor{}}}, ObjectRef::none(), std::nullopt};
  s->apply_edit(text);
  s->apply_edit(text);
  EXPECT_EQ(kind_of([&] { s->apply_edit(text); }), ErrorKind::HistoryLimit);
  s->undo();
  EXPECT_NO_THROW(s->apply_edit(text));
}

TEST(Session, MissingLabelsAndProviderIsSegmentationUnavailable) {
  auto image = std::make_shared<const ImageBuffer>(ImageBuffer::filled(8, 8, {}));
  SessionDeps deps;
  deps.backend = std::make_shared<vt::EchoBackend>();
  EXPECT_EQ(kind_of([&] { EditSession::create("x", image, std::nullopt, deps); }), ErrorKind::SegmentationUnavailable);
  EXPECT_EQ(kind_of([&] { EditSession::create("x", image, LabelMap::empty(7, 8), deps); }),
            ErrorKind::DimensionMismatch);
}

TEST(Session, EmptyLabelMapStillEditsText) {
  auto image = std::make_shared<const ImageBuffer>(ImageBuffer::filled(60, 60, {30, 30, 30}));
  SessionDeps deps;
  auto rec_backend = std::make_shared<vt::EchoBackend>();
  deps.backend = rec_backend;
  auto s = EditSession::create("x", image, LabelMap::empty(60, 60), deps);
  s->submit("add text \"hi\" to the center");
  EXPECT_EQ(s->recorder().violations(), 0u);
  EXPECT_EQ(rec_backend->calls(RequestKind::ObjectDescriptions), 0);
}

TEST(Session, TranscriptRestoreReproducesState) {
  std::mt19937 rng(6);
  auto s = vt::random_session(rng, std::make_shared<vt::EchoBackend>());
  for (int i = 0; i < 6; ++i) vt::try_edit(rng, *s);
  s->submit("what is in the image?");
  s->undo();
  s->undo();
  const auto t = s->transcript();
  EXPECT_EQ(transcript_from_json(to_json(t)), t);

  std::map<std::string, ImageRef> store;
  for (std::size_t v = 0; v <= s->history().size(); ++v) store[digest(*s->image_at(v))] = s->image_at(v);
  auto restored = EditSession::restore(t, s->original(), s->labels(),
                                       [&](const std::string& d) { return store.count(d) ? store.at(d) : nullptr; },
                                       SessionDeps{std::make_shared<vt::EchoBackend>(), nullptr, nullptr, std::nullopt});
  EXPECT_EQ(restored->transcript(), t);
  EXPECT_EQ(*restored->current_image(), *s->current_image());
  EXPECT_EQ(*restored->registry(), *s->registry());
  restored->redo();
  s->redo();
  EXPECT_EQ(*restored->current_image(), *s->current_image());

  EXPECT_EQ(kind_of([&] {
              EditSession::restore(t, s->original(), s->labels(), [](const std::string&) { return nullptr; },
                                   SessionDeps{std::make_shared<vt::EchoBackend>(), nullptr, nullptr, std::nullopt});
            }),
            ErrorKind::MissingFixture);
}
