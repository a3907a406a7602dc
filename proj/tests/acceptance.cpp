// One pass/fail line per acceptance criterion. Exit status is nonzero when any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "corpus.hpp"
#include "oracles.hpp"
#include "random_session.hpp"
#include "service_harness.hpp"
#include "vloop/edit_ops.hpp"
#include "vloop/replay.hpp"
#include "walkthrough.hpp"

using namespace vloop;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (pass) detail << why;
    pass = false;
  }
  void check(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

using Check = std::function<void(Outcome&)>;

void locality(Outcome& o) {
  std::mt19937 rng(4242);
  const BaselineInpaint inpaint;
  const auto t0 = std::chrono::steady_clock::now();
  int removals = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int w = vt::uniform(rng, 24, 64), h = vt::uniform(rng, 24, 64);
    const ImageBuffer img = vt::random_image(rng, w, h);
    const MaskRegion mask = vt::random_mask(rng, w, h);
    auto in_mask = [&](int x, int y) { return mask.contains(x, y); };
    const std::string at = "trial " + std::to_string(trial) + ": ";
    o.check(vt::changes_outside(img, blur_object(img, mask), in_mask) == 0, at + "blur");
    o.check(vt::changes_outside(img, change_color(img, mask, rgb_to_hsv({0, 0, 255})), in_mask) == 0, at + "color");
    o.check(vt::changes_outside(img, adjust_brightness(img, mask, Direction::Brighter), in_mask) == 0,
            at + "brightness");
    const MaskRegion region = removal_region(mask);
    if (!region.covers_everything()) {
      ++removals;
      o.check(vt::changes_outside(img, remove_object(img, mask, inpaint),
                                  [&](int x, int y) { return region.contains(x, y); }) == 0,
              at + "remove");
    }
    const TextResult t = add_text(img, "Lost cat", TextTarget{mask.centroid()});
    const Box outlined = t.placement.bbox.inflated(1);
    o.check(vt::changes_outside(img, t.image, [&](int x, int y) { return outlined.contains(x, y); }) == 0,
            at + "text");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(removals >= 50, "only " + std::to_string(removals) + " removal trials");
  o.check(secs < 60, "took " + std::to_string(secs) + " s");
  if (o.pass) o.detail << "60 trials x 5 actions (" << removals << " removals), " << secs << " s";
}

void brightness(Outcome& o) {
  std::mt19937 rng(64);
  const ImageBuffer img = vt::random_image(rng, 64, 64);
  const MaskRegion mask = vt::random_mask(rng, 64, 64);
  for (Direction d : {Direction::Brighter, Direction::Darker}) {
    const ImageBuffer out = adjust_brightness(img, mask, d);
    const int delta = d == Direction::Brighter ? 40 : -40;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const Rgb a = img.at(x, y), b = out.at(x, y);
        const Rgb want = mask.contains(x, y) ? Rgb{std::uint8_t(std::clamp(a.r + delta, 0, 255)),
                                                   std::uint8_t(std::clamp(a.g + delta, 0, 255)),
                                                   std::uint8_t(std::clamp(a.b + delta, 0, 255))}
                                             : a;
        o.check(b == want, "pixel " + std::to_string(x) + "," + std::to_string(y));
      }
    }
  }
  if (o.pass) o.detail << "64x64, both directions exact";
}

void hue(Outcome& o) {
  std::mt19937 rng(240);
  double worst_hue = 0;
  int worst_v = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rgb> px(48 * 48);
    for (auto& p : px) {
      p = {static_cast<std::uint8_t>(150 + rng() % 100), static_cast<std::uint8_t>(rng() % 60),
           static_cast<std::uint8_t>(rng() % 60)};
    }
    const ImageBuffer img(48, 48, px);
    const MaskRegion mask = vt::random_mask(rng, 48, 48);
    const ImageBuffer out = change_color(img, mask, rgb_to_hsv({0, 0, 255}));
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        if (!mask.contains(x, y)) continue;
        const Rgb a = img.at(x, y), b = out.at(x, y);
        worst_v = std::max(worst_v, std::abs(std::max({a.r, a.g, a.b}) - std::max({b.r, b.g, b.b})));
        const ColorHSV h = rgb_to_hsv(b);
        if (h.s * h.v >= 0.1) worst_hue = std::max(worst_hue, std::abs(h.h - 240.0));
      }
    }
  }
  o.check(worst_hue <= 2.0, "hue off by " + std::to_string(worst_hue));
  o.check(worst_v <= 1, "V drift " + std::to_string(worst_v));
  o.detail << "max hue error " << worst_hue << " deg, max V drift " << worst_v;
}

void blur(Outcome& o) {
  std::mt19937 rng(101);
  int worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const ImageBuffer img = vt::random_image(rng, 32, 32);
    const MaskRegion mask = vt::random_mask(rng, 32, 32);
    const ImageBuffer got = blur_object(img, mask);
    const ImageBuffer want = vt::blur_oracle(img, mask, blur_sigma(mask, {}));
    for (std::size_t i = 0; i < got.pixels().size(); ++i) {
      const Rgb a = got.pixels()[i], b = want.pixels()[i];
      worst = std::max({worst, std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
    }
  }
  o.check(worst <= 1, "oracle diff " + std::to_string(worst));

  int rises = 0;
  for (int trial = 0; trial < 5; ++trial) {
    ImageBuffer img = vt::random_image(rng, 32, 32);
    const MaskRegion mask = vt::random_mask(rng, 32, 32);
    double prev = vt::masked_laplacian_variance(img, mask);
    for (int k = 0; k < 5; ++k) {
      img = blur_object(img, mask);
      const double now = vt::masked_laplacian_variance(img, mask);
      if (now > prev + 1e-9 && now > vt::kQuantizedLaplacianVariance) ++rises;
      prev = now;
    }
  }
  o.check(rises == 0, std::to_string(rises) + " Laplacian variance increases");
  o.detail << "max oracle diff " << worst << ", " << rises << " variance increases over 5x5 passes";
}

void color_round_trip(Outcome& o) {
  int worst = 0;
  for (int r = 0; r < 256; r += 17) {
    for (int g = 0; g < 256; g += 17) {
      for (int b = 0; b < 256; b += 17) {
        const Rgb c{std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
        const Rgb back = hsv_to_rgb(rgb_to_hsv(c));
        worst = std::max({worst, std::abs(back.r - c.r), std::abs(back.g - c.g), std::abs(back.b - c.b)});
      }
    }
  }
  o.check(worst <= 1, "error " + std::to_string(worst));
  o.detail << "16^3 grid, max error " << worst;
}

void undo_redo(Outcome& o) {
  std::mt19937 rng(31337);
  auto backend = std::make_shared<vt::EchoBackend>();
  for (int trial = 0; trial < 200 && o.pass; ++trial) {
    const std::string at = "session " + std::to_string(trial) + ": ";
    auto s = vt::random_session(rng, backend);
    std::vector<std::string> digests{digest(*s->current_image())};
    const int edits = vt::uniform(rng, 1, 20);
    for (int i = 0; i < edits; ++i) {
      if (vt::try_edit(rng, *s)) digests.push_back(digest(*s->current_image()));
    }
    const std::size_t n = digests.size() - 1;
    const int k = vt::uniform(rng, 0, static_cast<int>(n));
    for (int i = 0; i < k; ++i) s->undo();
    o.check(digest(*s->current_image()) == digests[n - k], at + "undo digest");
    for (int i = 0; i < k; ++i) s->redo();
    o.check(digest(*s->current_image()) == digests[n], at + "redo digest");
    for (std::size_t i = 0; i < n; ++i) s->undo();
    o.check(*s->current_image() == *s->original(), at + "undo-all");
    if (n > 0) {
      const int keep = vt::uniform(rng, 0, static_cast<int>(n) - 1);
      for (int i = 0; i < keep; ++i) s->redo();
      if (vt::try_edit(rng, *s)) {
        o.check(s->history().size() == static_cast<std::size_t>(keep) + 1, at + "redo tail kept");
        try {
          s->redo();
          o.fail(at + "redo after branch");
        } catch (const Error& e) {
          o.check(e.kind() == ErrorKind::NothingToRedo, at + "redo after branch");
        }
      }
    }
  }
  if (o.pass) o.detail << "200 random sessions";
}

void walkthrough(Outcome& o) {
  const auto run = vt::run_scene("cats", "walkthrough.txt");
  const auto& s = *run.session;
  o.check(s.history().size() == 5, "edits completed: " + std::to_string(s.history().size()));
  std::vector<std::string> h1, h2;
  for (const auto& e : s.chat()) {
    if (e.heading_level == 1) h1.push_back(e.text);
    if (e.heading_level == 2) h2.push_back(e.text);
  }
  o.check(h1.size() == 5 && h2.size() == 20,
          "headings " + std::to_string(h1.size()) + "/" + std::to_string(h2.size()));
  const char* titles[] = {"Summary of Visual Changes", "AI Judgement", "Updated General Description",
                          "Updated Object Descriptions"};
  for (std::size_t k = 0; k < h1.size() && k < 5; ++k) {
    o.check(h1[k] == "Verification Output of Edit #" + std::to_string(k + 1) + " starts from here", h1[k]);
    for (std::size_t j = 0; j < 4 && k * 4 + j < h2.size(); ++j) {
      o.check(h2[k * 4 + j] == "[#" + std::to_string(k + 1) + "] " + titles[j], h2[k * 4 + j]);
    }
  }
  if (!s.history().empty()) {
    const auto text = format_object_list(s.history().front().verification.objects);
    o.check(text.find("Object 2: [removed]") != std::string::npos, "no removed marker after edit 1");
  }

  const auto history = s.history();
  const auto& original = *s.original();
  const auto& final_image = *s.current_image();
  const auto allowed = vt::write_region(history, original.width(), original.height());
  const std::size_t outside = vt::changes_outside(
      original, final_image, [&](int x, int y) { return allowed[static_cast<std::size_t>(y) * original.width() + x]; });
  o.check(outside == 0, std::to_string(outside) + " pixels changed outside edited regions");

  const auto again = vt::run_scene("cats", "walkthrough.txt");
  o.check(digest(*again.session->current_image()) == digest(final_image), "final digest differs between runs");
  if (o.pass) o.detail << "5 edits, 5+20 headings, final " << digest(final_image).substr(0, 12);
}

void router(Outcome& o) {
  const auto outcomes = vt::run_router_corpus();
  std::size_t classified = 0, intents = 0;
  for (const auto& c : outcomes) {
    classified += c.classified;
    intents += c.intent;
  }
  o.check(outcomes.size() == 30, std::to_string(outcomes.size()) + " prompts in corpus");
  o.check(classified == outcomes.size(), "classified " + std::to_string(classified));
  o.check(intents * 10 >= outcomes.size() * 9, "intents " + std::to_string(intents));
  try {
    const auto intent = parse_edit_intent("change the color of the cat's bow tie from red to blue",
                                          vt::scene_registry("cats"));
    o.check(intent.resolved_index == 8, "bow tie resolved elsewhere");
  } catch (const Error& e) {
    o.fail(std::string("bow tie: ") + e.what());
  }
  o.detail << (o.pass ? "" : "; ") << classified << "/" << outcomes.size() << " classified, " << intents << "/"
           << outcomes.size() << " intents";
}

void service(Outcome& o) {
  const auto store = vt::fresh_dir("vloop_acceptance_store");
  std::string id;
  std::map<std::string, std::string> before;
  std::vector<std::string> paths;
  double secs = 0;
  {
    vt::RunningService svc(vt::scripted_options(store, "cats"));
    auto c = svc.client();
    auto created = vt::create_scene_session(c, "cats");
    if (!created || created->status != 201) return o.fail("create failed");
    id = nlohmann::json::parse(created->body)["session_id"];
    const auto prompts = vt::read_lines(vt::data_dir() / "cats" / "walkthrough.txt");

    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& p : prompts) {
      auto r = vt::post_prompt(c, id, p);
      o.check(r && r->status / 100 == 2, "prompt: " + p);
    }
    for (const char* op : {"/undo", "/redo"}) {
      auto r = c.Post("/sessions/" + id + op);
      o.check(r && r->status / 100 == 2, op);
    }
    auto t = c.Get("/sessions/" + id + "/transcript");
    o.check(t && t->status == 200, "transcript");
    secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs < 2.0, "took " + std::to_string(secs) + " s");

    paths = {"/sessions", "/sessions/" + id + "/chat", "/sessions/" + id + "/transcript",
             "/sessions/" + id + "/images/original", "/sessions/" + id + "/images/current"};
    for (int v = 0; v <= 5; ++v) paths.push_back("/sessions/" + id + "/images/" + std::to_string(v));
    for (const auto& p : paths) {
      auto g = c.Get(p);
      o.check(g && g->status == 200, "GET " + p);
      if (g) before[p] = g->body;
    }
  }
  vt::RunningService again(vt::scripted_options(store, "cats"));
  auto c = again.client();
  for (const auto& p : paths) {
    auto g = c.Get(p);
    o.check(g && g->status == 200 && g->body == before[p], "after restart: " + p);
  }
  if (o.pass) o.detail << "round trip " << secs << " s, " << paths.size() << " GETs identical after restart";
}

void grounding(Outcome& o) {
  std::size_t requests = 0;
  for (const auto& [scene, file] : {std::pair{"cats", "walkthrough_questions.txt"}, {"dog", "session.txt"},
                                    {"bathroom", "session.txt"}}) {
    const auto run = vt::run_scene(scene, file);
    auto& rec = run.session->recorder();
    o.check(rec.violations() == 0, std::string(scene) + ": recorder violations");
    for (const auto& r : rec.records()) {
      ++requests;
      const std::size_t images = r.image_digests.size();
      bool ok = true;
      switch (r.kind) {
        case RequestKind::SummaryOfChanges: ok = images == 2 && r.texts.empty(); break;
        case RequestKind::GeneralDescription:
        case RequestKind::ObjectDescriptions: ok = images == 1; break;
        case RequestKind::Judgement: ok = images == 2 && r.texts.size() == 5; break;
        default: break;
      }
      o.check(ok, std::string(scene) + ": " + std::string(to_string(r.kind)));
    }
  }
  if (o.pass) o.detail << requests << " requests over 3 scenes, 0 violations";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Check>> criteria = {
      {"edit locality", locality},
      {"brightness exactness", brightness},
      {"hue rewrite", hue},
      {"blur oracle", blur},
      {"color round trip", color_round_trip},
      {"undo/redo algebra", undo_redo},
      {"walkthrough replay", walkthrough},
      {"prompt router corpus", router},
      {"service round trip", service},
      {"grounding discipline", grounding},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      check(o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
