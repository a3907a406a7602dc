#include "vloop/backend.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include "vloop/error.hpp"

namespace vloop {
namespace {

constexpr std::array<std::pair<RequestKind, std::string_view>, 7> kKindNames{{
    {RequestKind::GeneralDescription, "general_description"},
    {RequestKind::ObjectDescriptions, "object_descriptions"},
    {RequestKind::AnswerQuestion, "answer_question"},
    {RequestKind::SummaryOfChanges, "summary_of_changes"},
    {RequestKind::Judgement, "judgement"},
    {RequestKind::Classify, "classify"},
    {RequestKind::ResolveReference, "resolve_reference"},
}};

struct Contract {
  std::size_t images;
  std::vector<std::string_view> fields;
};

Contract contract_for(RequestKind kind) {
  switch (kind) {
    case RequestKind::GeneralDescription: return {1, {}};
    case RequestKind::ObjectDescriptions: return {1, {field::kIndices}};
    case RequestKind::AnswerQuestion: return {1, {field::kQuestion}};
    case RequestKind::SummaryOfChanges: return {2, {}};
    case RequestKind::Judgement:
      return {2,
              {field::kInstruction, field::kPreviousGeneral, field::kPreviousObjects, field::kNewGeneral,
               field::kNewObjects}};
    case RequestKind::Classify: return {0, {field::kPrompt}};
    case RequestKind::ResolveReference: return {0, {field::kReference, field::kObjects}};
  }
  return {0, {}};
}

std::string send_checked(VisionBackend& backend, const BackendRequest& request) {
  if (auto v = grounding_violation(request)) throw Error(ErrorKind::PreconditionViolation, *v);
  return backend.complete(request);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string join_indices(const std::vector<int>& indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(indices[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(RequestKind kind) noexcept {
  for (const auto& [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "unknown";
}

std::optional<RequestKind> request_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::string* BackendRequest::text(std::string_view name) const {
  for (const auto& f : texts) {
    if (f.name == name) return &f.value;
  }
  return nullptr;
}

std::optional<std::string> grounding_violation(const BackendRequest& request) {
  const Contract c = contract_for(request.kind);
  const std::string kind(to_string(request.kind));
  if (request.images.size() != c.images) {
    return kind + " carries " + std::to_string(request.images.size()) + " image(s); expected " +
           std::to_string(c.images);
  }
  for (const auto& img : request.images) {
    if (!img) return kind + " carries a null image";
  }
  std::set<std::string> seen;
  for (const auto& f : request.texts) {
    if (std::find(c.fields.begin(), c.fields.end(), f.name) == c.fields.end()) {
      return kind + " carries unexpected text field '" + f.name + "'";
    }
    if (!seen.insert(f.name).second) return kind + " repeats text field '" + f.name + "'";
    if (f.value.empty()) return kind + " has empty text field '" + f.name + "'";
  }
  for (auto name : c.fields) {
    if (!seen.count(std::string(name))) return kind + " is missing text field '" + std::string(name) + "'";
  }
  return std::nullopt;
}

std::string general_description(VisionBackend& backend, ImageRef image) {
  return send_checked(backend, {RequestKind::GeneralDescription, {std::move(image)}, {}});
}

std::vector<ObjectDescription> parse_object_lines(std::string_view response) {
  static const std::regex line_re(R"(^\s*[\(\[]?\s*(?:object\s*)?#?\s*(\d+)\s*[\)\]]?\s*[:.)\-]\s*(.*\S)\s*$)",
                                  std::regex::icase);
  std::vector<ObjectDescription> out;
  std::istringstream in{std::string(response)};
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_match(line, m, line_re)) out.push_back({std::stoi(m[1].str()), m[2].str()});
  }
  return out;
}

std::string format_object_lines(const std::vector<ObjectDescription>& objects) {
  std::string out;
  for (const auto& o : objects) {
    if (!out.empty()) out += '\n';
    out += "Object " + std::to_string(o.index) + ": " + o.text;
  }
  return out;
}

std::vector<ObjectDescription> object_descriptions(VisionBackend& backend, ImageRef som_image,
                                                   const std::vector<int>& live_indices) {
  if (live_indices.empty()) return {};
  const std::string response = send_checked(
      backend, {RequestKind::ObjectDescriptions, {std::move(som_image)}, {{std::string(field::kIndices), join_indices(live_indices)}}});
  const auto parsed = parse_object_lines(response);
  std::vector<ObjectDescription> out;
  std::vector<int> missing;
  for (int index : live_indices) {
    auto it = std::find_if(parsed.begin(), parsed.end(), [index](const auto& d) { return d.index == index; });
    if (it == parsed.end()) {
      missing.push_back(index);
    } else {
      out.push_back(*it);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::MissingIndexInResponse, "object descriptions lack object(s) " + join_indices(missing));
  }
  return out;
}

std::string summary_of_changes(VisionBackend& backend, ImageRef before, ImageRef after) {
  if (!before || !after || !before->same_size(*after)) {
    throw Error(ErrorKind::PreconditionViolation, "summary needs two images of the same size");
  }
  return send_checked(backend, {RequestKind::SummaryOfChanges, {std::move(before), std::move(after)}, {}});
}

std::string judgement(VisionBackend& backend, const JudgementContext& ctx) {
  if (!ctx.before || !ctx.after || !ctx.before->same_size(*ctx.after)) {
    throw Error(ErrorKind::PreconditionViolation, "judgement needs two images of the same size");
  }
  BackendRequest request{RequestKind::Judgement,
                         {ctx.before, ctx.after},
                         {{std::string(field::kInstruction), ctx.instruction},
                          {std::string(field::kPreviousGeneral), ctx.previous_general},
                          {std::string(field::kPreviousObjects), ctx.previous_objects},
                          {std::string(field::kNewGeneral), ctx.new_general},
                          {std::string(field::kNewObjects), ctx.new_objects}}};
  return send_checked(backend, request);
}

std::string answer_question(VisionBackend& backend, ImageRef image, std::string_view question) {
  return send_checked(backend,
                      {RequestKind::AnswerQuestion, {std::move(image)}, {{std::string(field::kQuestion), std::string(question)}}});
}

bool classify_with_backend(VisionBackend& backend, std::string_view prompt) {
  const std::string response =
      lower(send_checked(backend, {RequestKind::Classify, {}, {{std::string(field::kPrompt), std::string(prompt)}}}));
  const auto edit = response.find("edit");
  const auto question = response.find("question");
  if (edit == std::string::npos && question == std::string::npos) {
    throw Error(ErrorKind::MalformedResponse, "classification reply names neither question nor edit");
  }
  return edit < question;
}

std::optional<int> resolve_with_backend(VisionBackend& backend, std::string_view reference,
                                        const ObjectRegistry& registry) {
  std::vector<ObjectDescription> live;
  for (const auto& e : registry.entries()) {
    if (e.status == ObjectStatus::Live) live.push_back({e.index, e.description});
  }
  const std::string response = send_checked(
      backend, {RequestKind::ResolveReference,
                {},
                {{std::string(field::kReference), std::string(reference)},
                 {std::string(field::kObjects), live.empty() ? std::string("(none)") : format_object_lines(live)}}});
  static const std::regex number_re(R"((\d+))");
  std::smatch m;
  if (std::regex_search(response, m, number_re)) return std::stoi(m[1].str());
  if (lower(response).find("none") != std::string::npos) return std::nullopt;
  throw Error(ErrorKind::MalformedResponse, "reference resolution reply has no object index");
}

}  // namespace vloop
