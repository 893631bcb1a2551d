#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gazeintent {

/// A point in scene-camera pixel coordinates.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// One raw gaze point. Times are milliseconds since session start.
struct GazeSample {
    double t_ms = 0.0;
    double x = 0.0;
    double y = 0.0;
    double confidence = 1.0;

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

/// A stable-gaze event. Position is the mean of its member samples.
struct Fixation {
    double t_start_ms = 0.0;
    double duration_ms = 0.0;
    double x = 0.0;
    double y = 0.0;

    Point2 position() const { return {x, y}; }
    double midpoint_ms() const { return t_start_ms + 0.5 * duration_ms; }

    friend bool operator==(const Fixation&, const Fixation&) = default;
};

/// Dispersion-detector parameters. The dispersion bound is given in degrees
/// of visual angle and converted to pixels with px_per_deg.
struct FixationDetectorConfig {
    double dispersion_max_deg = 3.01;
    double px_per_deg = 30.0;
    double dur_min_ms = 80.0;
    double dur_max_ms = 400.0;
    double min_confidence = 0.6;

    double dispersion_max_px() const { return dispersion_max_deg * px_per_deg; }

    /// Throws InvalidInputError when any field is out of range.
    void validate() const;
};

enum class TaskLabel { Grasp, View, Unlabeled };

std::string_view to_string(TaskLabel label);
TaskLabel task_label_from_string(std::string_view text);

/// Object centroid plus the pre-measured thumb (G1) and index-finger (G2)
/// contact points, all in absolute scene pixels.
struct ObjectContext {
    Point2 centroid;
    Point2 grasp_thumb;
    Point2 grasp_index;
    std::string shape_id;

    void validate() const;

    friend bool operator==(const ObjectContext&, const ObjectContext&) = default;
};

struct Trial {
    std::string trial_id;
    std::string participant_id;
    TaskLabel task_label = TaskLabel::Unlabeled;
    std::vector<Fixation> fixations;
    ObjectContext object;

    friend bool operator==(const Trial&, const Trial&) = default;
};

/// Greedy dispersion-threshold fixation detection.
///
/// Samples below config.min_confidence are dropped first. A window starting
/// at the current sample grows while the maximum pairwise distance stays
/// within the dispersion bound and the window spans at most dur_max_ms. A
/// window that spans at least dur_min_ms becomes a fixation and scanning
/// resumes after it; otherwise scanning advances by one sample.
///
/// Throws InvalidInputError if sample times decrease or the config is invalid.
std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples,
                                       const FixationDetectorConfig& config = {});

/// Throws InvalidInputError unless times are non-decreasing, finite and >= 0
/// and confidences lie in [0, 1].
void validate_stream(std::span<const GazeSample> samples);

}  // namespace gazeintent
