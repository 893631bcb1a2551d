#include "gazeintent/stream.hpp"

#include "gazeintent/error.hpp"

#include <cmath>
#include <string>

namespace gazeintent {

void WindowConfig::validate() const {
    if (!(window_ms > 0.0) || !(hop_ms > 0.0)) {
        throw InvalidInputError("window config: window_ms and hop_ms must be positive");
    }
    if (hop_ms > window_ms) throw InvalidInputError("window config: hop_ms must not exceed window_ms");
    if (min_fixations < 1) throw InvalidInputError("window config: min_fixations must be at least 1");
    if (consecutive_required < 1) {
        throw InvalidInputError("window config: consecutive_required must be at least 1");
    }
    if (!(refractory_ms >= 0.0)) throw InvalidInputError("window config: refractory_ms must be >= 0");
}

std::string_view to_string(IntentionLabel label) {
    switch (label) {
        case IntentionLabel::Grasp: return "GRASP";
        case IntentionLabel::View: return "VIEW";
        case IntentionLabel::Insufficient: return "INSUFFICIENT";
    }
    return "INSUFFICIENT";
}

IntentionLabel intention_label_from_string(std::string_view text) {
    if (text == "GRASP") return IntentionLabel::Grasp;
    if (text == "VIEW") return IntentionLabel::View;
    if (text == "INSUFFICIENT") return IntentionLabel::Insufficient;
    throw InvalidInputError("unknown intention label '" + std::string(text) + "'");
}

Session::Session(ObjectContext context, std::shared_ptr<const TrainedModel> model, WindowConfig window,
                 FixationDetectorConfig detector)
    : model_(std::move(model)), window_(window), detector_(detector) {
    if (!model_) throw SessionError("session: no model");
    window_.validate();
    detector_.validate();
    set_context(std::move(context));
}

void Session::set_context(ObjectContext context) {
    try {
        context.validate();
    } catch (const InvalidInputError& e) {
        throw SessionError(std::string("session: ") + e.what());
    }
    context_ = std::move(context);
}

void Session::validate_next(const GazeSample& s, double previous) const {
    const GazeSample one[] = {s};
    validate_stream(one);
    if (s.t_ms < previous) {
        throw InvalidInputError("session: sample time " + std::to_string(s.t_ms) +
                                " precedes previous sample " + std::to_string(previous));
    }
}

std::vector<IntentionEvent> Session::push_sample(const GazeSample& sample) {
    return push_samples({&sample, 1});
}

std::vector<IntentionEvent> Session::push_samples(std::span<const GazeSample> samples) {
    double previous = last_ms_.value_or(0.0);
    for (const GazeSample& s : samples) {
        validate_next(s, previous);
        previous = s.t_ms;
    }
    std::vector<IntentionEvent> events;
    for (const GazeSample& s : samples) ingest(s, events);
    return events;
}

void Session::ingest(const GazeSample& sample, std::vector<IntentionEvent>& out) {
    if (!start_ms_) start_ms_ = sample.t_ms;
    last_ms_ = sample.t_ms;

    auto close_time = [&](std::size_t k) {
        return *start_ms_ + window_.window_ms + static_cast<double>(k) * window_.hop_ms;
    };
    while (sample.t_ms >= close_time(next_close_index_)) {
        if (auto event = close_window(close_time(next_close_index_))) out.push_back(std::move(*event));
        ++next_close_index_;
    }
    buffer_.push_back(sample);

    // Keep what the next window's detection tail can still reach.
    const double keep_from = close_time(next_close_index_) - window_.window_ms - detector_.dur_max_ms;
    while (!buffer_.empty() && buffer_.front().t_ms < keep_from) buffer_.pop_front();
}

std::optional<IntentionEvent> Session::close_window(double close_ms) {
    if (close_ms < refractory_until_ms_) return std::nullopt;

    const double open_ms = close_ms - window_.window_ms;
    const double tail_ms = open_ms - detector_.dur_max_ms;
    std::vector<GazeSample> tail;
    for (const GazeSample& s : buffer_) {
        if (s.t_ms >= tail_ms && s.t_ms < close_ms) tail.push_back(s);
    }

    IntentionEvent event;
    event.t_ms = close_ms;
    for (const Fixation& f : detect_fixations(tail, detector_)) {
        const double mid = f.midpoint_ms();
        if (mid >= open_ms && mid < close_ms) event.fixations.push_back(f);
    }

    if (event.fixations.size() < window_.min_fixations) {
        event.label = IntentionLabel::Insufficient;
        consecutive_grasp_ = 0;
        return event;
    }

    const FeatureVector features = compute_features(event.fixations, context_);
    event.window_features = features;
    const Label verdict = predict(*model_, project(features, model_->combination));
    if (verdict == Label::Grasp) {
        event.label = IntentionLabel::Grasp;
        if (++consecutive_grasp_ >= window_.consecutive_required) {
            event.fired = true;
            consecutive_grasp_ = 0;
            refractory_until_ms_ = close_ms + window_.refractory_ms;
        }
    } else {
        event.label = IntentionLabel::View;
        consecutive_grasp_ = 0;
    }
    return event;
}

}  // namespace gazeintent
