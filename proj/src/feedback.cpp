#include "vloop/feedback.hpp"

#include <algorithm>
#include <future>

#include "vloop/error.hpp"
#include "vloop/som.hpp"

namespace vloop {
namespace {

std::string marker(std::string_view title, const std::exception& e) {
  return std::string(title) + " unavailable: " + e.what();
}

}  // namespace

bool VerificationBundle::is_degraded(std::string_view part) const {
  return std::find(degraded.begin(), degraded.end(), part) != degraded.end();
}

nlohmann::json to_json(const VerificationBundle& b) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : b.objects) {
    objects.push_back({{"index", o.index}, {"text", o.text ? nlohmann::json(*o.text) : nlohmann::json(nullptr)}});
  }
  nlohmann::json out = {{"summary", b.summary},
                        {"judgement", b.judgement},
                        {"general", b.general},
                        {"objects", objects},
                        {"degraded", b.degraded}};
  out["objects_note"] = b.objects_note ? nlohmann::json(*b.objects_note) : nlohmann::json(nullptr);
  return out;
}

VerificationBundle verification_bundle_from_json(const nlohmann::json& doc) {
  try {
    VerificationBundle b;
    b.summary = doc.at("summary").get<std::string>();
    b.judgement = doc.at("judgement").get<std::string>();
    b.general = doc.at("general").get<std::string>();
    for (const auto& o : doc.at("objects")) {
      ObjectLine line{o.at("index").get<int>(), std::nullopt};
      if (!o.at("text").is_null()) line.text = o["text"].get<std::string>();
      b.objects.push_back(std::move(line));
    }
    if (doc.contains("objects_note") && !doc["objects_note"].is_null()) {
      b.objects_note = doc["objects_note"].get<std::string>();
    }
    b.degraded = doc.value("degraded", std::vector<std::string>{});
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("verification bundle: ") + e.what());
  }
}

std::string format_object_list(const std::vector<ObjectLine>& objects) {
  std::string out;
  for (const auto& o : objects) {
    if (!out.empty()) out += '\n';
    out += "Object " + std::to_string(o.index) + ": " + (o.text ? *o.text : std::string("[removed]"));
  }
  return out;
}

std::vector<ObjectLine> object_lines(const ObjectRegistry& registry) {
  std::vector<ObjectLine> out;
  for (const auto& e : registry.entries()) {
    out.push_back({e.index, e.status == ObjectStatus::Live ? std::optional(e.description) : std::nullopt});
  }
  return out;
}

VerificationBundle generate_verification(const VerificationRequest& req, VisionBackend& backend) {
  if (!req.registry) throw Error(ErrorKind::PreconditionViolation, "verification needs the post-edit registry");
  const ObjectRegistry& registry = *req.registry;
  VerificationBundle bundle;

  auto summary = std::async(std::launch::async, [&] { return summary_of_changes(backend, req.before, req.after); });
  auto general = std::async(std::launch::async, [&] { return general_description(backend, req.after); });
  std::future<std::vector<ObjectDescription>> objects;
  const bool ask_objects = req.describe_objects && !registry.live_indices().empty();
  if (ask_objects) {
    objects = std::async(std::launch::async, [&] {
      const auto som = std::make_shared<const ImageBuffer>(render_som_overlay(*req.after, registry.live_label_map()));
      return object_descriptions(backend, som, registry.live_indices());
    });
  }

  try {
    bundle.summary = summary.get();
  } catch (const std::exception& e) {
    bundle.summary = marker(kSummaryTitle, e);
    bundle.degraded.push_back("summary");
  }
  try {
    bundle.general = general.get();
  } catch (const std::exception& e) {
    bundle.general = marker(kGeneralTitle, e);
    bundle.degraded.push_back("general");
  }

  bundle.objects = object_lines(registry);
  if (ask_objects) {
    try {
      const auto described = objects.get();
      for (auto& line : bundle.objects) {
        if (!line.text) continue;
        auto it = std::find_if(described.begin(), described.end(), [&](const auto& d) { return d.index == line.index; });
        if (it != described.end()) line.text = it->text;
      }
    } catch (const std::exception& e) {
      bundle.objects_note = marker(kObjectsTitle, e) + ". Showing the previous descriptions.";
      bundle.degraded.push_back("objects");
    }
  } else if (!req.describe_objects) {
    bundle.objects_note = "No object was targeted, so the object descriptions are the same as before.";
  }

  try {
    auto or_none = [](std::string s) { return s.empty() ? std::string("(no objects)") : s; };
    bundle.judgement = judgement(backend, {req.before, req.after, req.previous_general, or_none(req.previous_objects),
                                           bundle.general, or_none(format_object_list(bundle.objects)),
                                           req.instruction});
  } catch (const std::exception& e) {
    bundle.judgement = marker(kJudgementTitle, e);
    bundle.degraded.push_back("judgement");
  }
  // Keep the part order fixed regardless of which call failed first.
  static const std::vector<std::string> order = {"summary", "judgement", "general", "objects"};
  std::sort(bundle.degraded.begin(), bundle.degraded.end(), [](const auto& a, const auto& b) {
    return std::find(order.begin(), order.end(), a) < std::find(order.begin(), order.end(), b);
  });
  return bundle;
}

}  // namespace vloop
