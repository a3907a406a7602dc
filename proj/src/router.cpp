#include "vloop/router.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <regex>
#include <set>

#include "vloop/error.hpp"

namespace vloop {
namespace {

constexpr const char* kBuiltinLexicon =
#include "vloop_builtin_lexicon.inc"
    ;

constexpr std::string_view kQuoteToken = "qtext";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool contains(const std::vector<std::string>& list, std::string_view word) {
  return std::find(list.begin(), list.end(), word) != list.end();
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string stem(std::string w) {
  if (w.size() > 4 && w.ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
  if (w.size() > 4 && (w.ends_with("ches") || w.ends_with("shes") || w.ends_with("xes"))) {
    return w.substr(0, w.size() - 2);
  }
  if (w.size() > 3 && w.back() == 's' && !w.ends_with("ss") && !w.ends_with("us")) w.pop_back();
  return w;
}

// --- lexicon ------------------------------------------------------------------

std::vector<std::vector<std::string>> phrases(const nlohmann::json& list) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : list) out.push_back(split_words(p.get<std::string>()));
  return out;
}

std::vector<std::string> words(const nlohmann::json& doc, const char* key) {
  return doc.contains(key) ? doc[key].get<std::vector<std::string>>() : std::vector<std::string>{};
}

// --- quoted payloads ------------------------------------------------------------

struct Quote {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the closing mark
  std::string payload;
};

const std::vector<std::string> kDoubleMarks = {"\"", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x9E"};
const std::vector<std::string> kSingleMarks = {"'", "`", "\xE2\x80\x98", "\xE2\x80\x99"};

std::optional<std::size_t> mark_at(std::string_view s, std::size_t i, const std::vector<std::string>& marks) {
  for (const auto& m : marks) {
    if (s.substr(i, m.size()) == m) return m.size();
  }
  return std::nullopt;
}

bool is_space_or_open(char c) { return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ':'; }
bool is_close_context(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || std::string_view(".,!?;:)").find(c) != std::string_view::npos;
}

// Double marks pair with any double mark; single marks must sit on word
// boundaries so apostrophes in "cat's" never open a quote.
std::optional<Quote> find_quote(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (auto open = mark_at(s, i, kDoubleMarks)) {
      for (std::size_t j = i + *open; j < s.size(); ++j) {
        if (auto close = mark_at(s, j, kDoubleMarks)) {
          return Quote{i, j + *close, std::string(s.substr(i + *open, j - i - *open))};
        }
      }
      continue;
    }
    if (auto open = mark_at(s, i, kSingleMarks)) {
      if (i > 0 && !is_space_or_open(s[i - 1])) continue;
      if (i + *open >= s.size() || std::isspace(static_cast<unsigned char>(s[i + *open]))) continue;
      for (std::size_t j = i + *open + 1; j < s.size(); ++j) {
        if (auto close = mark_at(s, j, kSingleMarks)) {
          const std::size_t after = j + *close;
          if (after == s.size() || is_close_context(s[after])) {
            return Quote{i, after, std::string(s.substr(i + *open, j - i - *open))};
          }
        }
      }
    }
  }
  return std::nullopt;
}

// --- prepared prompt --------------------------------------------------------------

struct Prepared {
  std::string raw;
  std::string cased;  // quote replaced, original case
  std::string text;   // lowered, contractions expanded
  std::optional<std::string> quote;
  std::vector<std::string> tokens;
};

Prepared prepare(std::string_view raw) {
  Prepared p;
  p.raw = trim(raw);
  p.cased = p.raw;
  if (auto q = find_quote(p.cased)) {
    p.quote = trim(q->payload);
    p.cased = p.cased.substr(0, q->begin) + " " + std::string(kQuoteToken) + " " + p.cased.substr(q->end);
  }
  // "Rosa, the orange cat": the appositive name is not a description word.
  static const std::regex appositive(R"(\b[A-Z][a-z]+,\s+(?=the\b))");
  std::string s = std::regex_replace(p.cased, appositive, "");
  // Curly apostrophes become straight ones before contraction handling.
  for (const std::string curly : {"\xE2\x80\x99", "\xE2\x80\x98"}) {
    for (auto pos = s.find(curly); pos != std::string::npos; pos = s.find(curly, pos)) s.replace(pos, curly.size(), "'");
  }
  s = lower(s);
  static const std::vector<std::pair<std::regex, std::string>> rewrites = {
      {std::regex(R"(\bcan't\b)"), "can not"},
      {std::regex(R"(\bwon't\b)"), "will not"},
      {std::regex(R"(n't\b)"), " not"},
      {std::regex(R"('s\b)"), ""},
      {std::regex(R"(s'(\s|$))"), "s$1"},
  };
  for (const auto& [re, rep] : rewrites) s = std::regex_replace(s, re, rep);
  p.text = s;
  p.tokens = split_words(s);
  return p;
}

std::string strip_without_clause(const std::string& text) {
  static const std::regex without_re(R"(,?\s+without\b.*$)");
  return std::regex_replace(text, without_re, "");
}

// --- cue matching -------------------------------------------------------------------

bool phrase_at(const std::vector<std::string>& tokens, std::size_t i, const std::vector<std::string>& phrase) {
  if (phrase.empty() || i + phrase.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < phrase.size(); ++k) {
    if (tokens[i + k] != phrase[k]) return false;
  }
  return true;
}

std::optional<std::size_t> first_phrase(const std::vector<std::string>& tokens,
                                        const std::vector<std::vector<std::string>>& list) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& ph : list) {
      if (phrase_at(tokens, i, ph)) return i;
    }
  }
  return std::nullopt;
}

bool any_token(const std::vector<std::string>& tokens, const std::vector<std::string>& list) {
  return std::any_of(tokens.begin(), tokens.end(), [&](const auto& t) { return contains(list, t); });
}

const ColorNameTable& colors() {
  static const ColorNameTable table;
  return table;
}

bool has_color_word(const std::vector<std::string>& tokens) {
  return std::any_of(tokens.begin(), tokens.end(), [](const auto& t) { return colors().contains(t); });
}

std::optional<ActionKind> detect_action(const std::vector<std::string>& tokens, const VerbLexicon& lex) {
  const bool quoted = contains(tokens, kQuoteToken);
  for (const auto& a : lex.actions) {
    const bool cue = first_phrase(tokens, a.cues).has_value();
    switch (a.action) {
      case ActionKind::AddText:
        if (cue && (any_token(tokens, a.requires_any) || (a.quote_counts_as_noun && quoted))) return a.action;
        break;
      case ActionKind::ChangeColor:
        if (cue || (any_token(tokens, a.color_verbs) && has_color_word(tokens))) return a.action;
        break;
      default:
        if (cue) return a.action;
    }
  }
  return std::nullopt;
}

const VerbLexicon& lexicon_of(const RouterOptions& o) { return o.lexicon ? *o.lexicon : VerbLexicon::builtin(); }

std::string supported_actions() { return "blur, remove, change color, adjust brightness, add text"; }

// --- name matching ------------------------------------------------------------------

class NameMatcher {
 public:
  explicit NameMatcher(const VerbLexicon& lex) : lex_(lex) {
    for (std::size_t g = 0; g < lex.synonyms.size(); ++g) {
      for (const auto& w : lex.synonyms[g]) group_[stem(w)] = g;
    }
  }

  bool same(const std::string& a, const std::string& b) const {
    const std::string sa = stem(a), sb = stem(b);
    if (sa == sb) return true;
    const auto ga = group_.find(sa), gb = group_.find(sb);
    return ga != group_.end() && gb != group_.end() && ga->second == gb->second;
  }

  std::size_t matched(const std::vector<std::string>& ref, const std::vector<std::string>& desc) const {
    std::size_t n = 0;
    for (const auto& r : ref) {
      if (std::any_of(desc.begin(), desc.end(), [&](const auto& d) { return same(r, d); })) ++n;
    }
    return n;
  }

  // Words before the first comma or relational word: "red bow tie" in
  // "red bow tie with a bell on the cream-colored cat".
  std::vector<std::string> head(const std::string& description) const {
    const auto comma = description.find(',');
    std::vector<std::string> out;
    for (auto& w : split_words(description.substr(0, comma))) {
      if (contains(lex_.relational_words, w)) break;
      out.push_back(std::move(w));
    }
    return out;
  }

 private:
  const VerbLexicon& lex_;
  std::map<std::string, std::size_t> group_;
};

std::optional<std::string> position_of(const std::string& word, const VerbLexicon& lex) {
  for (const auto& [side, list] : lex.positional_words) {
    if (contains(list, word)) return side;
  }
  return std::nullopt;
}

std::string candidate_line(const ObjectEntry& e) { return "Object " + std::to_string(e.index) + ": " + e.description; }

int resolve_by_rules(const std::string& reference, const ObjectRegistry& registry, const VerbLexicon& lex) {
  std::vector<std::string> content;
  std::vector<std::string> sides;
  for (auto& w : split_words(reference)) {
    if (auto side = position_of(w, lex)) {
      sides.push_back(*side);
    } else if (!contains(lex.stop_words, w)) {
      content.push_back(std::move(w));
    }
  }
  if (content.empty()) {
    throw Error(ErrorKind::MissingParameter, "the reference '" + reference + "' names no object");
  }

  const NameMatcher matcher(lex);
  struct Scored {
    const ObjectEntry* entry;
    std::size_t cover;
    std::size_t head;
  };
  std::vector<Scored> scored;
  for (const auto& e : registry.entries()) {
    if (e.status != ObjectStatus::Live) continue;
    scored.push_back({&e, matcher.matched(content, split_words(e.description)),
                      matcher.matched(content, matcher.head(e.description))});
  }

  // Acceptance needs more than half of the reference words matched.
  std::vector<Scored> accepted;
  for (const auto& s : scored) {
    if (2 * s.cover > content.size()) accepted.push_back(s);
  }
  if (accepted.empty()) {
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.cover > b.cover; });
    std::vector<std::string> nearest;
    for (const auto& s : scored) {
      if (s.cover == 0 || nearest.size() == 3) break;
      nearest.push_back(candidate_line(*s.entry));
    }
    throw Error(ErrorKind::NoMatchingObject, "no object matches '" + reference + "'", nearest);
  }

  auto keep_max = [&](auto key) {
    std::size_t best = 0;
    for (const auto& s : accepted) best = std::max(best, key(s));
    std::erase_if(accepted, [&](const auto& s) { return key(s) != best; });
  };
  keep_max([](const Scored& s) { return s.cover; });
  keep_max([](const Scored& s) { return s.head; });

  if (accepted.size() > 1 && !sides.empty()) {
    // "the left cat": pick the extreme centroid among the tied candidates.
    const std::string& side = sides.front();
    auto coordinate = [&](const Scored& s) {
      const Point c = registry.mask(s.entry->index).centroid();
      const int v = (side == "left" || side == "right") ? c.x : c.y;
      return (side == "left" || side == "top") ? -v : v;
    };
    int best = std::numeric_limits<int>::min();
    for (const auto& s : accepted) best = std::max(best, coordinate(s));
    std::erase_if(accepted, [&](const auto& s) { return coordinate(s) != best; });
  }

  if (accepted.size() > 1) {
    std::vector<std::string> names;
    for (const auto& s : accepted) names.push_back(candidate_line(*s.entry));
    throw Error(ErrorKind::AmbiguousReference, "'" + reference + "' matches several objects equally well", names);
  }
  return accepted.front().entry->index;
}

struct Trace {
  bool backend_failed = false;
};

int resolve_traced(const ObjectRef& ref, const ObjectRegistry& registry, const RouterOptions& options, Trace& trace) {
  switch (ref.kind) {
    case ObjectRef::Kind::None:
      throw Error(ErrorKind::MissingParameter, "the prompt names no object to edit");
    case ObjectRef::Kind::ByIndex:
      if (!registry.find(ref.index)) {
        throw Error(ErrorKind::UnknownObjectIndex, "there is no object " + std::to_string(ref.index));
      }
      if (!registry.is_live(ref.index)) {
        throw Error(ErrorKind::ObjectNotLive, "object " + std::to_string(ref.index) + " was removed");
      }
      return ref.index;
    case ObjectRef::Kind::ByName:
      break;
  }
  const VerbLexicon& lex = lexicon_of(options);
  if (options.backend) {
    std::optional<int> chosen;
    bool answered = false;
    try {
      chosen = resolve_with_backend(*options.backend, ref.name, registry);
      answered = true;
    } catch (const Error&) {
      trace.backend_failed = true;
    }
    if (answered && chosen && registry.is_live(*chosen)) return *chosen;
    if (answered && !chosen) {
      std::vector<std::string> nearest;
      try {
        resolve_by_rules(ref.name, registry, lex);
      } catch (const Error& e) {
        nearest = e.candidates();
      }
      throw Error(ErrorKind::NoMatchingObject, "no object matches '" + ref.name + "'", nearest);
    }
    if (answered) trace.backend_failed = true;  // named a dead or unknown index
  }
  return resolve_by_rules(ref.name, registry, lex);
}

// --- intent parsing ---------------------------------------------------------------------

std::optional<int> explicit_index(const std::string& text) {
  static const std::vector<std::regex> patterns = {
      std::regex(R"(#\s*(\d+))"),
      std::regex(R"(\bobject\s*(?:#|no\.?|number)?\s*(\d+))"),
      std::regex(R"(\b(?:number|index)\s*(\d+))"),
  };
  for (const auto& re : patterns) {
    std::smatch m;
    if (std::regex_search(text, m, re)) return std::stoi(m[1].str());
  }
  return std::nullopt;
}

// Token positions covered by any cue phrase of any action.
std::vector<bool> cue_mask(const std::vector<std::string>& tokens, const VerbLexicon& lex) {
  std::vector<bool> mask(tokens.size(), false);
  auto mark = [&](const std::vector<std::vector<std::string>>& list) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      for (const auto& ph : list) {
        if (phrase_at(tokens, i, ph)) std::fill(mask.begin() + i, mask.begin() + i + ph.size(), true);
      }
    }
  };
  for (const auto& a : lex.actions) mark(a.cues);
  mark(lex.darker);
  mark(lex.brighter);
  return mask;
}

bool is_content(const std::string& w, const VerbLexicon& lex) {
  if (w == kQuoteToken || contains(lex.stop_words, w) || contains(lex.generic_edit_verbs, w) ||
      contains(lex.unsupported_verbs, w) || contains(lex.courtesy_words, w) || contains(lex.interrogatives, w)) {
    return false;
  }
  for (const auto& a : lex.actions) {
    if (contains(a.requires_any, w) || contains(a.color_verbs, w)) return false;
    for (const auto& c : a.cues) {
      if (c.size() == 1 && c.front() == w) return false;
    }
  }
  for (const auto* list : {&lex.darker, &lex.brighter}) {
    for (const auto& c : *list) {
      if (c.size() == 1 && c.front() == w && !position_of(w, lex)) return false;
    }
  }
  return true;
}

// The object phrase: content words of the first boundary-delimited segment that
// has any. Cue phrases ("not want to see") never act as boundaries.
std::string reference_phrase(const std::vector<std::string>& tokens, const VerbLexicon& lex,
                             std::optional<std::size_t> excluded) {
  const auto cues = cue_mask(tokens, lex);
  std::vector<std::string> segment;
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    const bool boundary = i == tokens.size() || (!cues[i] && contains(lex.reference_boundaries, tokens[i]));
    if (boundary) {
      if (!segment.empty()) break;
      continue;
    }
    if (cues[i] || (excluded && *excluded == i)) continue;
    if (is_content(tokens[i], lex)) segment.push_back(tokens[i]);
  }
  std::string out;
  for (const auto& w : segment) out += (out.empty() ? "" : " ") + w;
  return out;
}

void reject_multi_action(const std::vector<std::string>& tokens, const VerbLexicon& lex) {
  std::vector<std::vector<std::string>> parts(1);
  for (const auto& t : tokens) {
    if (contains(lex.multi_action_separators, t)) {
      parts.emplace_back();
    } else {
      parts.back().push_back(t);
    }
  }
  std::set<ActionKind> seen;
  for (const auto& part : parts) {
    if (auto a = detect_action(part, lex)) seen.insert(*a);
  }
  if (seen.size() > 1) {
    throw Error(ErrorKind::UnrecognizedAction,
                "the prompt asks for more than one edit; send one action per prompt (supported: " +
                    supported_actions() + ")");
  }
}

struct ColorPick {
  std::string name;
  std::optional<std::size_t> position;
};

// The color after "to"/"into", else a color word that ends the prompt
// ("make the bowl blue"). A color word inside the object phrase ("the orange
// cat") is never the target.
ColorPick target_color(const std::vector<std::string>& tokens, const VerbLexicon& lex) {
  static const std::vector<std::string> skippable = {"a", "the", "bright", "light", "dark", "deep", "color", "colour"};
  std::optional<std::string> unknown;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != "to" && tokens[i] != "into") continue;
    for (std::size_t j = i + 1; j < tokens.size() && j <= i + 3; ++j) {
      if (colors().contains(tokens[j])) return {tokens[j], j};
      if (!contains(skippable, tokens[j])) {
        if (!unknown) unknown = tokens[j];
        break;
      }
    }
  }
  for (std::size_t i = tokens.size(); i-- > 0;) {
    if (!colors().contains(tokens[i]) || (i > 0 && tokens[i - 1] == "from")) continue;
    const bool trailing = std::none_of(tokens.begin() + static_cast<std::ptrdiff_t>(i) + 1, tokens.end(),
                                       [&](const auto& w) { return is_content(w, lex); });
    if (trailing) return {tokens[i], i};
  }
  if (unknown) colors().resolve(*unknown);
  throw Error(ErrorKind::MissingParameter, "no target color named; try e.g. 'change the color of the bowl to blue'");
}

Direction brightness_direction(const std::vector<std::string>& tokens, const VerbLexicon& lex) {
  const auto dark = first_phrase(tokens, lex.darker);
  const auto bright = first_phrase(tokens, lex.brighter);
  if (dark && (!bright || *dark < *bright)) return Direction::Darker;
  if (bright) return Direction::Brighter;
  throw Error(ErrorKind::MissingParameter, "say whether the object should be brighter or darker");
}

std::optional<Anchor> anchor_from_tokens(const std::vector<std::string>& tokens, const VerbLexicon& lex) {
  std::optional<HAlign> h;
  std::optional<VAlign> v;
  bool any = false;
  auto is = [&](const char* key, const std::string& w) {
    const auto it = lex.anchor_words.find(key);
    return it != lex.anchor_words.end() && contains(it->second, w);
  };
  for (const auto& w : tokens) {
    if (is("top", w) || is("bottom", w)) {
      if (!v) v = is("top", w) ? VAlign::Top : VAlign::Bottom;
      any = true;
    } else if (is("left", w) || is("right", w)) {
      if (!h) h = is("left", w) ? HAlign::Left : HAlign::Right;
      any = true;
    } else if (is("center", w)) {
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return Anchor{h.value_or(HAlign::Center), v.value_or(VAlign::Center)};
}

bool is_anchor_word(const std::string& w, const VerbLexicon& lex) {
  for (const auto& [key, list] : lex.anchor_words) {
    if (contains(list, w)) return true;
  }
  return false;
}

std::string unquoted_payload(const std::string& cased, const VerbLexicon& lex) {
  std::string nouns;
  for (const auto& a : lex.actions) {
    for (const auto& n : a.requires_any) nouns += (nouns.empty() ? "" : "|") + n;
  }
  if (nouns.empty()) return {};
  const std::regex tail_re("\\b(?:" + nouns + ")\\b\\s*:?\\s*(.+)$", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(cased, m, tail_re)) return {};
  std::string tail = m[1].str();
  static const std::regex location_re(
      R"(\s+(?:in|at|to|on|onto|into)\s+(?:the\s+)?(?:top|bottom|upper|lower|left|right|center|centre|middle|central)\b.*$)",
      std::regex::icase);
  static const std::regex object_re(R"(\s+(?:on|onto|over)\s+the\s+.*$)", std::regex::icase);
  tail = std::regex_replace(tail, location_re, "");
  tail = std::regex_replace(tail, object_re, "");
  tail = trim(tail);
  while (!tail.empty() && std::string_view(".!,;").find(tail.back()) != std::string_view::npos) tail.pop_back();
  return trim(tail);
}

EditIntent parse_add_text(const Prepared& p, const std::vector<std::string>& tokens, const std::string& text,
                          const VerbLexicon& lex) {
  AddTextParams params;
  std::vector<std::string> location_tokens = tokens;
  if (p.quote) {
    params.text = *p.quote;
  } else {
    params.text = unquoted_payload(p.cased, lex);
    // Only the words after the payload can carry the location.
    const auto tail_words = split_words(params.text);
    location_tokens.clear();
    std::size_t pos = 0;
    if (!tail_words.empty()) {
      for (std::size_t i = 0; i + tail_words.size() <= tokens.size(); ++i) {
        if (phrase_at(tokens, i, tail_words)) {
          pos = i + tail_words.size();
          break;
        }
      }
    }
    location_tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(pos), tokens.end());
  }
  if (p.quote && trim(params.text).empty()) throw Error(ErrorKind::EmptyText, "the quoted text is empty");
  if (trim(params.text).empty()) {
    throw Error(ErrorKind::MissingParameter, "no text to add; put the text in quotes");
  }

  EditIntent intent{EditAction{params}, ObjectRef::none(), std::nullopt};
  if (auto n = explicit_index(text)) {
    intent.object_ref = ObjectRef::by_index(*n);
    return intent;
  }
  // "on the bowl" targets an object unless the words after the preposition
  // are all location words ("on upper third").
  for (std::size_t i = 0; i < location_tokens.size(); ++i) {
    if (!contains(lex.text_object_prepositions, location_tokens[i])) continue;
    std::vector<std::string> rest(location_tokens.begin() + static_cast<std::ptrdiff_t>(i) + 1, location_tokens.end());
    const bool has_object = std::any_of(rest.begin(), rest.end(), [&](const auto& w) {
      return !is_anchor_word(w, lex) && !contains(lex.anchor_fillers, w) && is_content(w, lex);
    });
    if (has_object) {
      intent.object_ref = ObjectRef::by_name(reference_phrase(rest, lex, std::nullopt));
      return intent;
    }
  }
  std::get<AddTextParams>(intent.action.params).anchor =
      anchor_from_tokens(location_tokens, lex).value_or(Anchor{HAlign::Center, VAlign::Center});
  return intent;
}

EditIntent parse_traced(std::string_view raw, const ObjectRegistry& registry, const RouterOptions& options,
                        Trace& trace) {
  const VerbLexicon& lex = lexicon_of(options);
  const Prepared p = prepare(raw);
  if (p.raw.empty()) throw Error(ErrorKind::EmptyPrompt, "the prompt is empty");
  const std::string text = strip_without_clause(p.text);
  const auto tokens = split_words(text);

  reject_multi_action(tokens, lex);
  const auto action = detect_action(tokens, lex);
  if (!action) {
    for (const auto& t : tokens) {
      if (contains(lex.unsupported_verbs, t)) {
        throw Error(ErrorKind::UnrecognizedAction,
                    "'" + t + "' is not a supported edit; supported actions: " + supported_actions());
      }
    }
    throw Error(ErrorKind::UnrecognizedAction, "no supported edit action found; supported actions: " + supported_actions());
  }

  EditIntent intent;
  std::optional<std::size_t> excluded;
  switch (*action) {
    case ActionKind::AddText:
      intent = parse_add_text(p, tokens, text, lex);
      break;
    case ActionKind::Blur:
      intent.action.params = BlurParams{};
      break;
    case ActionKind::Remove:
      intent.action.params = RemoveParams{};
      break;
    case ActionKind::AdjustBrightness:
      intent.action.params = BrightnessParams{brightness_direction(tokens, lex)};
      break;
    case ActionKind::ChangeColor: {
      const ColorPick pick = target_color(tokens, lex);
      intent.action.params = ChangeColorParams{pick.name, colors().resolve(pick.name)};
      excluded = pick.position;
      break;
    }
  }

  if (*action != ActionKind::AddText) {
    if (auto n = explicit_index(text)) {
      intent.object_ref = ObjectRef::by_index(*n);
    } else {
      const std::string phrase = reference_phrase(tokens, lex, excluded);
      if (phrase.empty()) throw Error(ErrorKind::MissingParameter, "the prompt names no object to edit");
      intent.object_ref = ObjectRef::by_name(phrase);
    }
  }
  if (intent.object_ref.kind != ObjectRef::Kind::None) {
    intent.resolved_index = resolve_traced(intent.object_ref, registry, options, trace);
  }
  return intent;
}

// "Could you remove the bowl?" asks for an edit.
bool polite_request(const std::vector<std::string>& tokens, std::size_t first, const VerbLexicon& lex) {
  static const std::vector<std::string> modals = {"can", "could", "would", "will"};
  if (first >= tokens.size() || !contains(modals, tokens[first]) || first + 1 >= tokens.size() || tokens[first + 1] != "you") return false;
  std::size_t k = first + 2;
  while (k < tokens.size() && contains(lex.courtesy_words, tokens[k])) ++k;
  if (k >= tokens.size()) return false;
  if (contains(lex.generic_edit_verbs, tokens[k])) return true;
  for (const auto& a : lex.actions) {
    for (const auto& cue : a.cues) {
      if (phrase_at(tokens, k, cue)) return true;
    }
  }
  for (const auto* list : {&lex.darker, &lex.brighter}) {
    for (const auto& cue : *list) {
      if (phrase_at(tokens, k, cue)) return true;
    }
  }
  return false;
}

PromptKind classify_by_rules(const Prepared& p, const VerbLexicon& lex) {
  std::size_t first = 0;
  while (first < p.tokens.size() && contains(lex.courtesy_words, p.tokens[first])) ++first;
  if (first < p.tokens.size() && contains(lex.interrogatives, p.tokens[first])) {
    const bool negated_imperative = (p.tokens[first] == "do" || p.tokens[first] == "does") &&
                                    first + 1 < p.tokens.size() && p.tokens[first + 1] == "not";
    if (!negated_imperative && !polite_request(p.tokens, first, lex)) return PromptKind::Question;
  }
  const std::string cased = trim(p.cased);
  if (!cased.empty() && cased.back() == '?' && !polite_request(p.tokens, first, lex)) return PromptKind::Question;
  if (detect_action(p.tokens, lex) || any_token(p.tokens, lex.generic_edit_verbs) ||
      any_token(p.tokens, lex.unsupported_verbs)) {
    return PromptKind::Edit;
  }
  return PromptKind::Question;
}

PromptKind classify_traced(std::string_view text, const RouterOptions& options, Trace& trace) {
  const Prepared p = prepare(text);
  if (p.raw.empty()) throw Error(ErrorKind::EmptyPrompt, "the prompt is empty");
  if (options.backend) {
    try {
      return classify_with_backend(*options.backend, p.raw) ? PromptKind::Edit : PromptKind::Question;
    } catch (const Error&) {
      trace.backend_failed = true;
    }
  }
  return classify_by_rules(p, lexicon_of(options));
}

}  // namespace

std::string_view to_string(PromptKind kind) noexcept { return kind == PromptKind::Edit ? "edit" : "question"; }
std::string_view to_string(RouteTier tier) noexcept { return tier == RouteTier::Backend ? "backend" : "rules"; }

std::string describe(const ObjectRef& ref) {
  switch (ref.kind) {
    case ObjectRef::Kind::ByIndex:
      return "#" + std::to_string(ref.index);
    case ObjectRef::Kind::ByName:
      return "'" + ref.name + "'";
    case ObjectRef::Kind::None:
      break;
  }
  return "none";
}

nlohmann::json to_json(const EditIntent& intent) {
  nlohmann::json action = {{"kind", std::string(to_string(intent.action.kind()))}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ChangeColorParams>) {
          action["color"] = p.color_name;
          action["rgb"] = {p.target.r, p.target.g, p.target.b};
        } else if constexpr (std::is_same_v<T, BrightnessParams>) {
          action["direction"] = p.direction == Direction::Brighter ? "brighter" : "darker";
        } else if constexpr (std::is_same_v<T, AddTextParams>) {
          action["text"] = p.text;
          if (p.anchor) action["anchor"] = to_string(*p.anchor);
        }
      },
      intent.action.params);
  nlohmann::json ref;
  switch (intent.object_ref.kind) {
    case ObjectRef::Kind::None:
      ref = {{"kind", "none"}};
      break;
    case ObjectRef::Kind::ByIndex:
      ref = {{"kind", "index"}, {"index", intent.object_ref.index}};
      break;
    case ObjectRef::Kind::ByName:
      ref = {{"kind", "name"}, {"name", intent.object_ref.name}};
      break;
  }
  nlohmann::json out = {{"action", action}, {"object_ref", ref}};
  out["resolved_index"] = intent.resolved_index ? nlohmann::json(*intent.resolved_index) : nlohmann::json(nullptr);
  return out;
}

EditIntent edit_intent_from_json(const nlohmann::json& doc) {
  try {
    const auto& a = doc.at("action");
    const auto kind_name = a.at("kind").get<std::string>();
    const auto kind = action_kind_from_string(kind_name);
    if (!kind) throw Error(ErrorKind::InvalidArgument, "unknown action kind " + kind_name);
    EditIntent intent;
    switch (*kind) {
      case ActionKind::Blur:
        intent.action.params = BlurParams{};
        break;
      case ActionKind::Remove:
        intent.action.params = RemoveParams{};
        break;
      case ActionKind::ChangeColor: {
        const auto rgb = a.at("rgb");
        intent.action.params = ChangeColorParams{
            a.at("color").get<std::string>(),
            Rgb{rgb.at(0).get<std::uint8_t>(), rgb.at(1).get<std::uint8_t>(), rgb.at(2).get<std::uint8_t>()}};
        break;
      }
      case ActionKind::AdjustBrightness:
        intent.action.params =
            BrightnessParams{a.at("direction").get<std::string>() == "darker" ? Direction::Darker : Direction::Brighter};
        break;
      case ActionKind::AddText: {
        AddTextParams params{a.at("text").get<std::string>(), std::nullopt};
        if (a.contains("anchor")) {
          params.anchor = anchor_from_string(a["anchor"].get<std::string>());
          if (!params.anchor) throw Error(ErrorKind::InvalidArgument, "bad anchor " + a["anchor"].dump());
        }
        intent.action.params = params;
        break;
      }
    }
    const auto& ref = doc.at("object_ref");
    const auto ref_kind = ref.at("kind").get<std::string>();
    if (ref_kind == "index") {
      intent.object_ref = ObjectRef::by_index(ref.at("index").get<int>());
    } else if (ref_kind == "name") {
      intent.object_ref = ObjectRef::by_name(ref.at("name").get<std::string>());
    } else if (ref_kind != "none") {
      throw Error(ErrorKind::InvalidArgument, "unknown object_ref kind " + ref_kind);
    }
    if (doc.contains("resolved_index") && !doc["resolved_index"].is_null()) {
      intent.resolved_index = doc["resolved_index"].get<int>();
    }
    return intent;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("edit intent: ") + e.what());
  }
}

VerbLexicon VerbLexicon::from_json(const nlohmann::json& doc) {
  VerbLexicon lex;
  try {
    lex.version = doc.at("version").get<int>();
    lex.interrogatives = words(doc, "interrogatives");
    lex.courtesy_words = words(doc, "courtesy_words");
    for (const auto& a : doc.at("actions")) {
      const auto name = a.at("action").get<std::string>();
      const auto kind = action_kind_from_string(name);
      if (!kind) throw Error(ErrorKind::InvalidArgument, "lexicon: unknown action " + name);
      lex.actions.push_back({*kind, phrases(a.at("cues")), words(a, "requires_any"),
                             a.value("quote_counts_as_noun", false), words(a, "color_verbs")});
    }
    lex.generic_edit_verbs = words(doc, "generic_edit_verbs");
    lex.unsupported_verbs = words(doc, "unsupported_verbs");
    lex.darker = phrases(doc.at("directions").at("darker"));
    lex.brighter = phrases(doc.at("directions").at("brighter"));
    lex.multi_action_separators = words(doc, "multi_action_separators");
    lex.reference_boundaries = words(doc, "reference_boundaries");
    lex.stop_words = words(doc, "stop_words");
    lex.relational_words = words(doc, "relational_words");
    lex.positional_words = doc.at("positional_words").get<std::map<std::string, std::vector<std::string>>>();
    lex.synonyms = doc.at("synonyms").get<std::vector<std::vector<std::string>>>();
    lex.anchor_words = doc.at("anchor_words").get<std::map<std::string, std::vector<std::string>>>();
    lex.anchor_fillers = words(doc, "anchor_fillers");
    lex.text_object_prepositions = words(doc, "text_object_prepositions");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("lexicon: ") + e.what());
  }
  return lex;
}

VerbLexicon VerbLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFixture, "cannot open lexicon " + path.string());
  return from_json(nlohmann::json::parse(in));
}

const VerbLexicon& VerbLexicon::builtin() {
  static const VerbLexicon lex = from_json(nlohmann::json::parse(kBuiltinLexicon));
  return lex;
}

PromptKind classify_prompt(std::string_view text, const RouterOptions& options) {
  Trace trace;
  return classify_traced(text, options, trace);
}

EditIntent parse_edit_intent(std::string_view text, const ObjectRegistry& registry, const RouterOptions& options) {
  Trace trace;
  return parse_traced(text, registry, options, trace);
}

int resolve_object_reference(const ObjectRef& ref, const ObjectRegistry& registry, const RouterOptions& options) {
  Trace trace;
  return resolve_traced(ref, registry, options, trace);
}

RoutedPrompt route_prompt(std::string_view text, const ObjectRegistry& registry, const RouterOptions& options) {
  Trace trace;
  RoutedPrompt routed;
  routed.raw_text = std::string(text);
  routed.kind = classify_traced(text, options, trace);
  if (routed.kind == PromptKind::Edit) routed.intent = parse_traced(text, registry, options, trace);
  routed.tier = options.backend && !trace.backend_failed ? RouteTier::Backend : RouteTier::Rules;
  return routed;
}

}  // namespace vloop
