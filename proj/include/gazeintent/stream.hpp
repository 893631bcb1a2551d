#pragma once

#include "gazeintent/features.hpp"
#include "gazeintent/gaze.hpp"
#include "gazeintent/learn.hpp"

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gazeintent {

struct WindowConfig {
    double window_ms = 3000.0;
    double hop_ms = 500.0;
    std::size_t min_fixations = 2;
    std::size_t consecutive_required = 2;
    /// Classification pause after a fired event.
    double refractory_ms = 2000.0;

    void validate() const;
};

enum class IntentionLabel { Grasp, View, Insufficient };

std::string_view to_string(IntentionLabel label);
IntentionLabel intention_label_from_string(std::string_view text);

struct IntentionEvent {
    double t_ms = 0.0;  ///< window close time
    IntentionLabel label = IntentionLabel::Insufficient;
    std::optional<FeatureVector> window_features;
    bool fired = false;
    /// Fixations the window was classified on.
    std::vector<Fixation> fixations;

    friend bool operator==(const IntentionEvent&, const IntentionEvent&) = default;
};

/// Online sliding-window recognizer for one gaze stream.
///
/// Windows close at t0 + window_ms + k * hop_ms, where t0 is the first
/// sample's time. A window closes when the first sample at or after its
/// close time arrives, and covers [close - window_ms, close). Fixations are
/// detected on a slightly longer tail and kept when their temporal midpoint
/// lies inside the window. A GRASP verdict fires once `consecutive_required`
/// GRASP windows occur in a row; afterwards the counter resets and no
/// windows are classified during the refractory period.
///
/// Not thread-safe: calls on one session must be serialized.
class Session {
public:
    /// Throws SessionError when the model is null or the context invalid.
    Session(ObjectContext context, std::shared_ptr<const TrainedModel> model,
            WindowConfig window = {}, FixationDetectorConfig detector = {});

    /// Throws InvalidInputError if the sample is invalid or older than the
    /// previous one; the session is unchanged in that case.
    std::vector<IntentionEvent> push_sample(const GazeSample& sample);

    /// Equivalent to pushing each sample in order. The batch is validated
    /// up front and rejected as a whole.
    std::vector<IntentionEvent> push_samples(std::span<const GazeSample> samples);

    /// Context used from the next window close onwards.
    void set_context(ObjectContext context);

    const ObjectContext& context() const { return context_; }
    const TrainedModel& model() const { return *model_; }
    const WindowConfig& window() const { return window_; }

private:
    void validate_next(const GazeSample& sample, double previous) const;
    void ingest(const GazeSample& sample, std::vector<IntentionEvent>& out);
    std::optional<IntentionEvent> close_window(double close_ms);

    ObjectContext context_;
    std::shared_ptr<const TrainedModel> model_;
    WindowConfig window_;
    FixationDetectorConfig detector_;

    std::deque<GazeSample> buffer_;
    std::optional<double> start_ms_;
    std::optional<double> last_ms_;
    std::size_t next_close_index_ = 0;
    std::size_t consecutive_grasp_ = 0;
    double refractory_until_ms_ = -1.0;
};

}  // namespace gazeintent
