#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "vloop/backend.hpp"
#include "vloop/image.hpp"
#include "vloop/mask.hpp"

namespace vt {

inline std::filesystem::path data_dir() { return VLOOP_TEST_DATA; }

/// Uniform integer in [lo, hi] straight from the engine, so sequences are
/// identical on every standard library.
inline int uniform(std::mt19937& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint32_t>(hi - lo + 1));
}

inline vloop::ImageBuffer random_image(std::mt19937& rng, int w, int h) {
  std::vector<vloop::Rgb> px(static_cast<std::size_t>(w) * h);
  for (auto& p : px) {
    p = {static_cast<std::uint8_t>(rng() & 255), static_cast<std::uint8_t>(rng() & 255),
         static_cast<std::uint8_t>(rng() & 255)};
  }
  return vloop::ImageBuffer(w, h, std::move(px));
}

/// A union of random ellipses and rectangles, never empty and never the whole image.
inline std::vector<std::uint8_t> random_blob(std::mt19937& rng, int w, int h) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * h, 0);
  const int parts = uniform(rng, 1, 3);
  for (int k = 0; k < parts; ++k) {
    const int cx = uniform(rng, 0, w - 1);
    const int cy = uniform(rng, 0, h - 1);
    const int rx = uniform(rng, 1, std::max(1, w / 4));
    const int ry = uniform(rng, 1, std::max(1, h / 4));
    const bool ellipse = rng() & 1;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = double(x - cx) / rx;
        const double dy = double(y - cy) / ry;
        const bool in = ellipse ? dx * dx + dy * dy <= 1.0 : std::abs(x - cx) <= rx && std::abs(y - cy) <= ry;
        if (in) bits[static_cast<std::size_t>(y) * w + x] = 1;
      }
    }
  }
  std::size_t area = 0;
  for (auto b : bits) area += b;
  if (area == bits.size()) bits[0] = 0;
  return bits;
}

inline vloop::MaskRegion random_mask(std::mt19937& rng, int w, int h, int index = 1) {
  return vloop::MaskRegion(index, w, h, random_blob(rng, w, h));
}

/// Count of pixels that differ between `a` and `b` where `allowed` is false.
template <typename Pred>
std::size_t changes_outside(const vloop::ImageBuffer& a, const vloop::ImageBuffer& b, Pred allowed) {
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!allowed(x, y) && !(a.at(x, y) == b.at(x, y))) ++n;
    }
  }
  return n;
}

/// Answers every request kind with deterministic text derived from the
/// request, so sessions of any length run without a script.
class EchoBackend final : public vloop::VisionBackend {
 public:
  std::string complete(const vloop::BackendRequest& r) override {
    std::lock_guard lock(mutex_);
    ++calls_[r.kind];
    const std::string tag = r.images.empty() ? std::string("none") : vloop::digest(*r.images.front()).substr(0, 8);
    switch (r.kind) {
      case vloop::RequestKind::GeneralDescription:
        return "scene " + tag;
      case vloop::RequestKind::ObjectDescriptions: {
        std::string out;
        std::string indices = *r.text("indices");
        std::size_t pos = 0;
        while (pos < indices.size()) {
          const auto comma = indices.find(',', pos);
          const std::string n = indices.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
          out += "Object " + std::to_string(std::stoi(n)) + ": item " + std::to_string(std::stoi(n)) + " in " + tag + "\n";
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
        return out;
      }
      case vloop::RequestKind::AnswerQuestion:
        return "answer about " + tag;
      case vloop::RequestKind::SummaryOfChanges:
        return "changes " + tag + " to " + vloop::digest(*r.images.back()).substr(0, 8);
      case vloop::RequestKind::Judgement:
        return "judged: " + *r.text("instruction");
      case vloop::RequestKind::Classify:
        return "edit";
      case vloop::RequestKind::ResolveReference:
        return "none";
    }
    return "";
  }
  int calls(vloop::RequestKind k) const {
    std::lock_guard lock(mutex_);
    auto it = calls_.find(k);
    return it == calls_.end() ? 0 : it->second;
  }

 private:
  mutable std::mutex mutex_;
  std::map<vloop::RequestKind, int> calls_;
};

}  // namespace vt
