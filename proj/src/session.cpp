#include "vloop/session.hpp"

#include <algorithm>

#include "vloop/error.hpp"
#include "vloop/som.hpp"

namespace vloop {
namespace {

std::string describe_intent(const EditIntent& intent) {
  const std::string target = intent.resolved_index ? "object " + std::to_string(*intent.resolved_index) : "the image";
  return std::visit(
      [&](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BlurParams>) {
          return "Blur " + target + ".";
        } else if constexpr (std::is_same_v<T, RemoveParams>) {
          return "Remove " + target + ".";
        } else if constexpr (std::is_same_v<T, ChangeColorParams>) {
          return "Change the color of " + target + " to " + p.color_name + ".";
        } else if constexpr (std::is_same_v<T, BrightnessParams>) {
          return "Make " + target + (p.direction == Direction::Brighter ? " brighter." : " darker.");
        } else {
          if (p.anchor) return "Add the text \"" + p.text + "\" at the " + to_string(*p.anchor) + " of the image.";
          return "Add the text \"" + p.text + "\" on " + target + ".";
        }
      },
      intent.action.params);
}

std::string error_text(const Error& e) {
  std::string text = "Error (" + std::string(to_string(e.kind())) + "): " + e.what();
  if (!e.candidates().empty()) {
    text += " Candidates: ";
    for (std::size_t i = 0; i < e.candidates().size(); ++i) text += (i ? "; " : "") + e.candidates()[i];
  }
  return text;
}

}  // namespace

EditSession::EditSession(std::string id, ImageRef image, std::shared_ptr<const LabelMap> labels, SessionDeps deps,
                         SessionConfig config)
    : id_(std::move(id)),
      config_(std::move(config)),
      original_(std::move(image)),
      labels_(std::move(labels)),
      inpaint_(deps.inpaint ? deps.inpaint : std::make_shared<BaselineInpaint>()) {
  if (!deps.backend) throw Error(ErrorKind::InvalidArgument, "a session needs a backend");
  recorder_ = std::make_shared<RecordingBackend>(std::move(deps.backend), std::move(deps.wire_log));
}

std::unique_ptr<EditSession> EditSession::create(std::string id, ImageRef image, std::optional<LabelMap> labels,
                                                 SessionDeps deps, SessionConfig config) {
  if (!image) throw Error(ErrorKind::InvalidArgument, "a session needs an image");
  if (!labels) {
    if (!deps.segmentation) {
      throw Error(ErrorKind::SegmentationUnavailable, "no label map was given and no segmentation provider is set");
    }
    try {
      labels = deps.segmentation->segment(*image);
    } catch (const Error& e) {
      throw Error(ErrorKind::SegmentationUnavailable, std::string("segmentation failed: ") + e.what());
    }
  }
  if (labels->width() != image->width() || labels->height() != image->height()) {
    throw Error(ErrorKind::DimensionMismatch, "label map and image sizes differ");
  }
  auto label_ptr = std::make_shared<const LabelMap>(std::move(*labels));
  std::unique_ptr<EditSession> s(new EditSession(std::move(id), image, label_ptr, std::move(deps), std::move(config)));

  ObjectRegistry registry = ObjectRegistry::from_label_map(label_ptr);
  s->initial_general_ = general_description(*s->recorder_, image);
  const auto som = std::make_shared<const ImageBuffer>(render_som_overlay(*image, *label_ptr));
  if (!registry.empty()) {
    for (const auto& d : object_descriptions(*s->recorder_, som, registry.live_indices())) {
      registry = registry.with_description(d.index, d.text);
    }
  }
  s->initial_registry_ = std::make_shared<const ObjectRegistry>(std::move(registry));
  s->initial_exchanges_ = s->take_exchanges();

  auto& chat = s->state_.chat;
  chat.push_back({std::nullopt, Author::System, "Initial general description: " + s->initial_general_, std::nullopt});
  if (s->initial_registry_->empty()) {
    chat.push_back({std::nullopt, Author::System, "No objects were segmented in this image.", std::nullopt});
  } else {
    chat.push_back({std::nullopt, Author::System, "Initial object descriptions:", std::nullopt});
    for (const auto& line : object_lines(*s->initial_registry_)) {
      chat.push_back({std::nullopt, Author::System, format_object_list({line}), std::nullopt});
    }
  }
  return s;
}

std::unique_ptr<EditSession> EditSession::restore(const SessionTranscript& t, ImageRef original, LabelMap labels,
                                                  const std::function<ImageRef(const std::string&)>& snapshot,
                                                  SessionDeps deps) {
  if (!original || digest(*original) != t.original_digest) {
    throw Error(ErrorKind::InvalidArgument, "stored original image does not match the transcript");
  }
  if (digest(labels) != t.labels_digest) {
    throw Error(ErrorKind::InvalidArgument, "stored label map does not match the transcript");
  }
  auto label_ptr = std::make_shared<const LabelMap>(std::move(labels));
  std::unique_ptr<EditSession> s(new EditSession(t.session_id, original, label_ptr, std::move(deps), t.config));
  s->initial_general_ = t.initial_general;
  s->initial_registry_ = std::make_shared<const ObjectRegistry>(label_ptr, t.initial_objects);
  s->initial_exchanges_ = t.initial_exchanges;
  s->exchange_seq_ = t.initial_exchanges.size();

  State& st = s->state_;
  for (const auto& ev : t.events) {
    s->exchange_seq_ += ev.exchanges.size();
    switch (ev.type) {
      case EventType::Edit: {
        if (!ev.intent || !ev.verification) throw Error(ErrorKind::InvalidArgument, "edit event lacks its record");
        st.history.resize(st.cursor);
        EditRecord r;
        r.seq = ev.seq;
        r.prompt = ev.prompt;
        r.intent = *ev.intent;
        r.tier = ev.tier;
        r.image_before = s->current_locked();
        r.registry_before = s->registry_locked();
        if (digest(*r.image_before) != ev.before_digest) {
          throw Error(ErrorKind::InvalidArgument, "edit #" + std::to_string(ev.seq) + " starts from an unexpected image");
        }
        r.image_after = snapshot(ev.after_digest);
        if (!r.image_after || digest(*r.image_after) != ev.after_digest) {
          throw Error(ErrorKind::MissingFixture, "snapshot " + ev.after_digest + " is missing or corrupt");
        }
        r.registry_after = std::make_shared<const ObjectRegistry>(label_ptr, ev.registry_after);
        r.verification = *ev.verification;
        r.text = ev.text;
        r.general_after = r.verification.is_degraded("general") ? s->current_general() : r.verification.general;
        st.history.push_back(std::move(r));
        ++st.cursor;
        break;
      }
      case EventType::Undo:
        if (st.cursor == 0) throw Error(ErrorKind::InvalidArgument, "transcript undoes past the start");
        --st.cursor;
        break;
      case EventType::Redo:
        if (st.cursor >= st.history.size()) throw Error(ErrorKind::InvalidArgument, "transcript redoes past the end");
        ++st.cursor;
        break;
      case EventType::Question:
      case EventType::Error:
        break;
    }
  }
  if (st.cursor != t.cursor) throw Error(ErrorKind::InvalidArgument, "transcript cursor disagrees with its events");
  st.chat = t.chat;
  st.events = t.events;
  return s;
}

std::vector<WireRecord> EditSession::take_exchanges() {
  auto records = recorder_->records();
  std::vector<WireRecord> fresh(records.begin() + static_cast<std::ptrdiff_t>(exchanges_taken_), records.end());
  exchanges_taken_ = records.size();
  // Feedback calls finish in any order; the transcript lists them by kind.
  std::stable_sort(fresh.begin(), fresh.end(), [](const auto& a, const auto& b) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  for (auto& r : fresh) r.sequence = ++exchange_seq_;
  return fresh;
}

ImageRef EditSession::current_locked() const {
  return state_.cursor == 0 ? original_ : state_.history[state_.cursor - 1].image_after;
}

std::shared_ptr<const ObjectRegistry> EditSession::registry_locked() const {
  return state_.cursor == 0 ? initial_registry_ : state_.history[state_.cursor - 1].registry_after;
}

ImageRef EditSession::current_image() const {
  std::lock_guard lock(state_mutex_);
  return current_locked();
}

std::shared_ptr<const ObjectRegistry> EditSession::registry() const {
  std::lock_guard lock(state_mutex_);
  return registry_locked();
}

std::vector<EditRecord> EditSession::history() const {
  std::lock_guard lock(state_mutex_);
  return state_.history;
}

std::size_t EditSession::cursor() const {
  std::lock_guard lock(state_mutex_);
  return state_.cursor;
}

std::vector<ChatEntry> EditSession::chat() const {
  std::lock_guard lock(state_mutex_);
  return state_.chat;
}

std::string EditSession::initial_general() const { return initial_general_; }

std::string EditSession::current_general() const {
  std::lock_guard lock(state_mutex_);
  return state_.cursor == 0 ? initial_general_ : state_.history[state_.cursor - 1].general_after;
}

ImageRef EditSession::image_at(std::size_t version) const {
  std::lock_guard lock(state_mutex_);
  if (version == 0) return original_;
  if (version > state_.history.size()) return nullptr;
  return state_.history[version - 1].image_after;
}

ImageBuffer EditSession::som_current() const {
  ImageRef image;
  std::shared_ptr<const ObjectRegistry> registry;
  {
    std::lock_guard lock(state_mutex_);
    image = current_locked();
    registry = registry_locked();
  }
  return render_som_overlay(*image, registry->live_label_map());
}

void EditSession::record_error(std::string_view prompt, const Error& error) {
  auto exchanges = take_exchanges();
  std::lock_guard lock(state_mutex_);
  state_.chat.push_back({std::nullopt, Author::System, error_text(error), std::nullopt});
  TranscriptEvent ev;
  ev.type = EventType::Error;
  ev.prompt = std::string(prompt);
  ev.error_kind = std::string(to_string(error.kind()));
  ev.error_message = error.what();
  ev.candidates = error.candidates();
  ev.cursor_after = state_.cursor;
  ev.exchanges = std::move(exchanges);
  state_.events.push_back(std::move(ev));
}

PromptResult EditSession::submit(std::string_view prompt) {
  std::lock_guard writer(writer_);
  PromptResult result;
  ImageRef current;
  std::shared_ptr<const ObjectRegistry> registry;
  {
    std::lock_guard lock(state_mutex_);
    result.chat_begin = state_.chat.size();
    state_.chat.push_back({std::nullopt, Author::User, std::string(prompt), std::nullopt});
    current = current_locked();
    registry = registry_locked();
  }
  try {
    RouterOptions options;
    if (config_.router_use_backend) options.backend = recorder_.get();
    const RoutedPrompt routed = route_prompt(prompt, *registry, options);
    result.kind = routed.kind;
    result.tier = routed.tier;
    if (routed.kind == PromptKind::Question) {
      result.answer = answer_question(*recorder_, current, prompt);
      auto exchanges = take_exchanges();
      std::lock_guard lock(state_mutex_);
      state_.chat.push_back({std::nullopt, Author::System, result.answer, std::nullopt});
      TranscriptEvent ev;
      ev.type = EventType::Question;
      ev.prompt = std::string(prompt);
      ev.tier = routed.tier;
      ev.answer = result.answer;
      ev.cursor_after = state_.cursor;
      ev.exchanges = std::move(exchanges);
      state_.events.push_back(std::move(ev));
      return result;
    }
    result.seq = apply_locked(*routed.intent, std::string(prompt), routed.tier, result.chat_begin).seq;
    return result;
  } catch (const Error& e) {
    record_error(prompt, e);
    throw;
  }
}

EditRecord EditSession::apply_edit(const EditIntent& intent, std::string prompt, RouteTier tier) {
  std::lock_guard writer(writer_);
  if (prompt.empty()) {
    EditIntent described = intent;
    if (!described.resolved_index && described.object_ref.kind == ObjectRef::Kind::ByIndex) {
      described.resolved_index = described.object_ref.index;
    }
    prompt = describe_intent(described);
  }
  std::size_t chat_begin = 0;
  {
    std::lock_guard lock(state_mutex_);
    chat_begin = state_.chat.size();
    state_.chat.push_back({std::nullopt, Author::User, prompt, std::nullopt});
  }
  try {
    return apply_locked(intent, prompt, tier, chat_begin);
  } catch (const Error& e) {
    record_error(prompt, e);
    throw;
  }
}

EditRecord EditSession::apply_locked(const EditIntent& intent_in, std::string prompt, RouteTier tier,
                                     std::size_t /*chat_begin*/) {
  ImageRef before;
  std::shared_ptr<const ObjectRegistry> registry;
  std::size_t cursor = 0;
  std::string previous_general;
  {
    std::lock_guard lock(state_mutex_);
    before = current_locked();
    registry = registry_locked();
    cursor = state_.cursor;
    previous_general = cursor == 0 ? initial_general_ : state_.history[cursor - 1].general_after;
  }
  if (cursor >= config_.max_edits) {
    throw Error(ErrorKind::HistoryLimit,
                "the session already holds " + std::to_string(cursor) + " edits, the configured maximum");
  }

  EditIntent intent = intent_in;
  if (!intent.resolved_index && intent.object_ref.kind != ObjectRef::Kind::None) {
    intent.resolved_index = resolve_object_reference(intent.object_ref, *registry);
  }
  if (intent.resolved_index) {
    const int index = *intent.resolved_index;
    if (!registry->find(index)) throw Error(ErrorKind::UnknownObjectIndex, "there is no object " + std::to_string(index));
    if (!registry->is_live(index)) {
      throw Error(ErrorKind::ObjectNotLive, "object " + std::to_string(index) + " was removed");
    }
  }

  ActionResult applied = apply_action(*before, intent.action, intent.resolved_index, *registry, *inpaint_, config_.edit);
  auto after = std::make_shared<const ImageBuffer>(std::move(applied.image));
  ObjectRegistry registry_after =
      intent.action.kind() == ActionKind::Remove ? registry->with_removed(*intent.resolved_index) : *registry;

  VerificationRequest request;
  request.before = before;
  request.after = after;
  request.registry = &registry_after;
  request.previous_general = previous_general;
  request.previous_objects = format_object_list(object_lines(*registry));
  request.instruction = prompt;
  request.describe_objects = intent.resolved_index.has_value();
  VerificationBundle bundle = generate_verification(request, *recorder_);

  if (request.describe_objects && !bundle.is_degraded("objects")) {
    for (const auto& line : bundle.objects) {
      if (line.text) registry_after = registry_after.with_description(line.index, *line.text);
    }
  }

  EditRecord record;
  record.seq = static_cast<int>(cursor) + 1;
  record.prompt = std::move(prompt);
  record.intent = intent;
  record.tier = tier;
  record.image_before = before;
  record.image_after = after;
  record.registry_before = registry;
  record.registry_after = std::make_shared<const ObjectRegistry>(std::move(registry_after));
  record.verification = bundle;
  record.text = applied.text;
  record.general_after = bundle.is_degraded("general") ? previous_general : bundle.general;

  auto exchanges = take_exchanges();
  std::lock_guard lock(state_mutex_);
  state_.history.resize(state_.cursor);
  state_.history.push_back(record);
  state_.cursor = state_.history.size();
  for (auto& entry : format_chat_entries(record.seq, bundle)) state_.chat.push_back(std::move(entry));

  TranscriptEvent ev;
  ev.type = EventType::Edit;
  ev.prompt = record.prompt;
  ev.seq = record.seq;
  ev.tier = tier;
  ev.intent = intent;
  ev.before_digest = digest(*before);
  ev.after_digest = digest(*after);
  ev.verification = bundle;
  ev.registry_after = record.registry_after->entries();
  ev.text = record.text;
  ev.cursor_after = state_.cursor;
  ev.exchanges = std::move(exchanges);
  state_.events.push_back(std::move(ev));
  return record;
}

void EditSession::undo() {
  std::lock_guard writer(writer_);
  std::lock_guard lock(state_mutex_);
  if (state_.cursor == 0) throw Error(ErrorKind::NothingToUndo, "there is no edit to undo");
  const int seq = state_.history[state_.cursor - 1].seq;
  --state_.cursor;
  const std::string now = state_.cursor == 0 ? "the original image"
                                             : "the result of edit #" + std::to_string(state_.cursor);
  state_.chat.push_back(
      {std::nullopt, Author::System, "Undid edit #" + std::to_string(seq) + ". The current image is " + now + ".", seq});
  TranscriptEvent ev;
  ev.type = EventType::Undo;
  ev.seq = seq;
  ev.cursor_after = state_.cursor;
  state_.events.push_back(std::move(ev));
}

void EditSession::redo() {
  std::lock_guard writer(writer_);
  std::lock_guard lock(state_mutex_);
  if (state_.cursor >= state_.history.size()) throw Error(ErrorKind::NothingToRedo, "there is no undone edit to redo");
  const int seq = state_.history[state_.cursor].seq;
  ++state_.cursor;
  state_.chat.push_back({std::nullopt, Author::System,
                         "Redid edit #" + std::to_string(seq) + ". The current image is the result of edit #" +
                             std::to_string(seq) + ".",
                         seq});
  TranscriptEvent ev;
  ev.type = EventType::Redo;
  ev.seq = seq;
  ev.cursor_after = state_.cursor;
  state_.events.push_back(std::move(ev));
}

SessionTranscript EditSession::transcript() const {
  std::lock_guard lock(state_mutex_);
  SessionTranscript t;
  t.session_id = id_;
  t.config = config_;
  t.width = original_->width();
  t.height = original_->height();
  t.original_digest = digest(*original_);
  t.labels_digest = digest(*labels_);
  t.initial_general = initial_general_;
  t.initial_objects = initial_registry_->entries();
  t.initial_exchanges = initial_exchanges_;
  t.events = state_.events;
  t.cursor = state_.cursor;
  t.chat = state_.chat;
  return t;
}

}  // namespace vloop
