#include <fstream>

#include "vloop/backend.hpp"
#include "vloop/error.hpp"

namespace vloop {

nlohmann::json to_json(const WireRecord& r) {
  nlohmann::json texts = nlohmann::json::object();
  for (const auto& f : r.texts) texts[f.name] = f.value;
  nlohmann::json out = {
      {"seq", r.sequence},
      {"kind", std::string(to_string(r.kind))},
      {"images", r.image_digests},
      {"texts", texts},
  };
  if (r.error.empty()) {
    out["response"] = r.response;
  } else {
    out["error"] = r.error;
  }
  if (!r.violation.empty()) out["violation"] = r.violation;
  return out;
}

RecordingBackend::RecordingBackend(std::shared_ptr<VisionBackend> inner, std::optional<std::filesystem::path> log_path)
    : inner_(std::move(inner)), log_path_(std::move(log_path)) {}

std::string RecordingBackend::complete(const BackendRequest& request) {
  WireRecord record;
  record.kind = request.kind;
  record.texts = request.texts;
  for (const auto& img : request.images) record.image_digests.push_back(img ? digest(*img) : std::string("null"));
  if (auto v = grounding_violation(request)) record.violation = *v;

  std::string response;
  std::optional<Error> failure;
  if (!record.violation.empty()) {
    failure = Error(ErrorKind::PreconditionViolation, record.violation);
  } else {
    try {
      response = inner_->complete(request);
    } catch (const Error& e) {
      failure = e;
    }
  }
  if (failure) record.error = std::string(to_string(failure->kind()));
  record.response = response;

  {
    std::lock_guard lock(mutex_);
    record.sequence = records_.size() + 1;
    if (!record.violation.empty()) ++violations_;
    if (log_path_) {
      std::ofstream out(*log_path_, std::ios::app);
      out << to_json(record).dump() << '\n';
    }
    records_.push_back(record);
  }
  if (failure) throw *failure;
  return response;
}

std::vector<WireRecord> RecordingBackend::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t RecordingBackend::violations() const {
  std::lock_guard lock(mutex_);
  return violations_;
}

}  // namespace vloop
