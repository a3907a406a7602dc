#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vloop/image.hpp"
#include "vloop/mask.hpp"

namespace vloop {

enum class ObjectStatus { Live, Removed };

struct ObjectEntry {
  int index = 0;
  std::string description;
  ObjectStatus status = ObjectStatus::Live;

  friend bool operator==(const ObjectEntry&, const ObjectEntry&) = default;
};

/// Stable-indexed objects plus the label map they were segmented from. Masks
/// are captured once; removal flips status but never renumbers.
class ObjectRegistry {
 public:
  ObjectRegistry() = default;
  ObjectRegistry(std::shared_ptr<const LabelMap> labels, std::vector<ObjectEntry> entries);

  /// One live entry per label, described as "object <n>" until descriptions arrive.
  static ObjectRegistry from_label_map(std::shared_ptr<const LabelMap> labels);

  const std::vector<ObjectEntry>& entries() const noexcept { return entries_; }
  const LabelMap& labels() const { return *labels_; }
  const std::shared_ptr<const LabelMap>& labels_ptr() const noexcept { return labels_; }
  bool empty() const noexcept { return entries_.empty(); }

  const ObjectEntry* find(int index) const noexcept;
  bool is_live(int index) const noexcept;
  std::vector<int> live_indices() const;
  std::vector<int> all_indices() const;

  /// Throws UnknownObjectIndex or ObjectNotLive.
  MaskRegion mask(int index) const;
  /// Label map with removed objects cleared, the input for SoM rendering.
  LabelMap live_label_map() const;

  ObjectRegistry with_description(int index, std::string text) const;
  ObjectRegistry with_removed(int index) const;

  friend bool operator==(const ObjectRegistry& a, const ObjectRegistry& b) {
    return a.entries_ == b.entries_ &&
           (a.labels_ == b.labels_ || (a.labels_ && b.labels_ && *a.labels_ == *b.labels_));
  }

 private:
  std::shared_ptr<const LabelMap> labels_;
  std::vector<ObjectEntry> entries_;
};

}  // namespace vloop
