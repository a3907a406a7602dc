#include <gtest/gtest.h>

#include "corpus.hpp"
#include "vloop/error.hpp"
#include "vloop/router.hpp"

using namespace vloop;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

const ObjectRegistry& cats() {
  static const ObjectRegistry reg = vt::scene_registry("cats");
  return reg;
}

}  // namespace

TEST(RouterCorpus, ClassifiesAllAndResolvesNinetyPercent) {
  const auto outcomes = vt::run_router_corpus();
  ASSERT_EQ(outcomes.size(), 30u);
  int intents = 0;
  for (const auto& o : outcomes) {
    EXPECT_TRUE(o.classified) << o.text;
    if (o.intent) {
      ++intents;
    } else {
      ADD_FAILURE() << "intent miss: " << o.text << " -> " << o.detail;
    }
  }
  EXPECT_GE(intents, 27);
}

TEST(Router, EmptyPromptRejected) {
  EXPECT_EQ(kind_of([] { classify_prompt("   "); }), ErrorKind::EmptyPrompt);
}

TEST(Router, BowTiePhrasingTargetsTheBowTie) {
  const auto intent = parse_edit_intent("change the color of the cat's bow tie from red to blue", cats());
  EXPECT_EQ(intent.resolved_index, 8);
  const auto& p = std::get<ChangeColorParams>(intent.action.params);
  EXPECT_EQ(p.color_name, "blue");
  EXPECT_EQ(p.target, (Rgb{0, 0, 255}));
}

TEST(Router, IndexReferences) {
  EXPECT_EQ(parse_edit_intent("Blur object 3", cats()).resolved_index, 3);
  EXPECT_EQ(parse_edit_intent("make #6 darker", cats()).resolved_index, 6);
  EXPECT_EQ(kind_of([] { parse_edit_intent("blur object 42", cats()); }), ErrorKind::UnknownObjectIndex);
  const auto without_cat = cats().with_removed(2);
  EXPECT_EQ(kind_of([&] { parse_edit_intent("blur object 2", without_cat); }), ErrorKind::ObjectNotLive);
}

TEST(Router, AppositiveNameResolves) {
  EXPECT_EQ(parse_edit_intent("Remove Rosa, the orange cat.", cats()).resolved_index, 2);
}

TEST(Router, TwoCatsAreAmbiguousWithoutQualifier) {
  try {
    parse_edit_intent("blur the cat", cats());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AmbiguousReference);
    EXPECT_GE(e.candidates().size(), 2u);
  }
}

TEST(Router, DirectionWords) {
  const auto darker = parse_edit_intent("make the orange cat darker", cats());
  EXPECT_EQ(std::get<BrightnessParams>(darker.action.params).direction, Direction::Darker);
  const auto brighter = parse_edit_intent("increase the brightness of the orange cat", cats());
  EXPECT_EQ(std::get<BrightnessParams>(brighter.action.params).direction, Direction::Brighter);
}

TEST(Router, ParameterErrors) {
  EXPECT_EQ(kind_of([] { parse_edit_intent("change the color of the orange cat", cats()); }),
            ErrorKind::MissingParameter);
  EXPECT_EQ(kind_of([] { parse_edit_intent("change the color of the orange cat to glorp", cats()); }),
            ErrorKind::UnknownColorName);
  EXPECT_EQ(kind_of([] { parse_edit_intent("rotate the orange cat", cats()); }), ErrorKind::UnrecognizedAction);
  EXPECT_EQ(kind_of([] { parse_edit_intent("add text \"\" to the center", cats()); }), ErrorKind::EmptyText);
}

TEST(Router, TextOnObjectHasNoAnchor) {
  const auto intent = parse_edit_intent("add text \"Elsa\" on the orange cat", cats());
  const auto& p = std::get<AddTextParams>(intent.action.params);
  EXPECT_EQ(p.text, "Elsa");
  EXPECT_FALSE(p.anchor);
  EXPECT_EQ(intent.resolved_index, 2);
}

TEST(Router, QuestionsAndEditsClassify) {
  EXPECT_EQ(classify_prompt("Is the woman smiling"), PromptKind::Question);
  EXPECT_EQ(classify_prompt("Do you see any imperfections in the photo?"), PromptKind::Question);
  EXPECT_EQ(classify_prompt("blur the person out"), PromptKind::Edit);
  EXPECT_EQ(classify_prompt("Could you remove the bowl?"), PromptKind::Edit);
}

TEST(Router, BackendTierUsedWhenConfigured) {
  ScriptedMock mock({{"c", {RequestKind::Classify, {}, {}, {}}, "edit", {}, false},
                     {"r", {RequestKind::ResolveReference, {"kitty"}, {}, {}}, "4", {}, false}});
  RouterOptions opts;
  opts.backend = &mock;
  const auto routed = route_prompt("blur the pale kitty", cats(), opts);
  EXPECT_EQ(routed.kind, PromptKind::Edit);
  EXPECT_EQ(routed.tier, RouteTier::Backend);
  EXPECT_EQ(routed.intent->resolved_index, 4);
}

TEST(Router, BackendFailureFallsBackToRules) {
  ScriptedMock mock({{"c", {RequestKind::Classify, {}, {}, {}}, "", "unavailable", true},
                     {"r", {RequestKind::ResolveReference, {}, {}, {}}, "", "unavailable", true}});
  RouterOptions opts;
  opts.backend = &mock;
  const auto routed = route_prompt("remove the orange cat", cats(), opts);
  EXPECT_EQ(routed.tier, RouteTier::Rules);
  EXPECT_EQ(routed.intent->resolved_index, 2);
}

TEST(Router, IntentJsonRoundTrip) {
  for (const char* prompt : {"remove the orange cat", "Change the color of the bow tie to blue.",
                             "make the orange cat darker", "generate text `Hello' to the top left corner.",
                             "make #2 vague."}) {
    const auto intent = parse_edit_intent(prompt, cats());
    EXPECT_EQ(edit_intent_from_json(to_json(intent)), intent) << prompt;
  }
}

TEST(Lexicon, LoadsFromFileAndRejectsUnknownActions) {
  EXPECT_NO_THROW(VerbLexicon::load(std::filesystem::path(VLOOP_SOURCE_DIR) / "data" / "verb_lexicon.json"));
  auto doc = nlohmann::json::parse(std::ifstream(std::filesystem::path(VLOOP_SOURCE_DIR) / "data" / "verb_lexicon.json"));
  doc["actions"][0]["action"] = "Rotate";
  EXPECT_THROW(VerbLexicon::from_json(doc), Error);
}
