#include "vloop/registry.hpp"

#include <algorithm>

#include "vloop/error.hpp"

namespace vloop {

ObjectRegistry::ObjectRegistry(std::shared_ptr<const LabelMap> labels, std::vector<ObjectEntry> entries)
    : labels_(std::move(labels)), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].index == entries_[i - 1].index) {
      throw Error(ErrorKind::InvalidArgument, "duplicate object index " + std::to_string(entries_[i].index));
    }
  }
}

ObjectRegistry ObjectRegistry::from_label_map(std::shared_ptr<const LabelMap> labels) {
  std::vector<ObjectEntry> entries;
  for (int index : labels->indices()) entries.push_back({index, "object " + std::to_string(index), ObjectStatus::Live});
  return ObjectRegistry(std::move(labels), std::move(entries));
}

const ObjectEntry* ObjectRegistry::find(int index) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const ObjectEntry& e, int i) { return e.index < i; });
  return it != entries_.end() && it->index == index ? &*it : nullptr;
}

bool ObjectRegistry::is_live(int index) const noexcept {
  const auto* e = find(index);
  return e && e->status == ObjectStatus::Live;
}

std::vector<int> ObjectRegistry::live_indices() const {
  std::vector<int> out;
  for (const auto& e : entries_) {
    if (e.status == ObjectStatus::Live) out.push_back(e.index);
  }
  return out;
}

std::vector<int> ObjectRegistry::all_indices() const {
  std::vector<int> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.index);
  return out;
}

MaskRegion ObjectRegistry::mask(int index) const {
  const auto* e = find(index);
  if (!e || !labels_) {
    throw Error(ErrorKind::UnknownObjectIndex, "there is no object " + std::to_string(index));
  }
  if (e->status != ObjectStatus::Live) {
    throw Error(ErrorKind::ObjectNotLive, "object " + std::to_string(index) + " has been removed");
  }
  return mask_from_label(*labels_, index);
}

LabelMap ObjectRegistry::live_label_map() const {
  std::vector<std::uint16_t> labels(labels_->labels().begin(), labels_->labels().end());
  for (auto& l : labels) {
    if (l != 0 && !is_live(l)) l = 0;
  }
  return LabelMap(labels_->width(), labels_->height(), std::move(labels));
}

ObjectRegistry ObjectRegistry::with_description(int index, std::string text) const {
  ObjectRegistry copy = *this;
  for (auto& e : copy.entries_) {
    if (e.index == index) e.description = std::move(text);
  }
  return copy;
}

ObjectRegistry ObjectRegistry::with_removed(int index) const {
  ObjectRegistry copy = *this;
  for (auto& e : copy.entries_) {
    if (e.index == index) e.status = ObjectStatus::Removed;
  }
  return copy;
}

}  // namespace vloop
