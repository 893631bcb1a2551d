#include "gazeintent/gaze.hpp"

#include "gazeintent/error.hpp"

#include <string>

namespace gazeintent {

namespace {

bool finite_point(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

void FixationDetectorConfig::validate() const {
    if (!(dispersion_max_deg > 0.0) || !(px_per_deg > 0.0) || !(dur_min_ms > 0.0) ||
        !(dur_max_ms > 0.0) || !(min_confidence > 0.0)) {
        throw InvalidInputError("fixation detector config: all fields must be strictly positive");
    }
    if (!(dur_min_ms < dur_max_ms)) {
        throw InvalidInputError("fixation detector config: dur_min_ms must be below dur_max_ms");
    }
}

std::string_view to_string(TaskLabel label) {
    switch (label) {
        case TaskLabel::Grasp: return "GRASP";
        case TaskLabel::View: return "VIEW";
        case TaskLabel::Unlabeled: return "UNLABELED";
    }
    return "UNLABELED";
}

TaskLabel task_label_from_string(std::string_view text) {
    if (text == "GRASP") return TaskLabel::Grasp;
    if (text == "VIEW") return TaskLabel::View;
    if (text == "UNLABELED") return TaskLabel::Unlabeled;
    throw InvalidInputError("unknown task label '" + std::string(text) + "'");
}

void ObjectContext::validate() const {
    if (!finite_point(centroid) || !finite_point(grasp_thumb) || !finite_point(grasp_index)) {
        throw InvalidInputError("object context: points must be finite");
    }
    if (grasp_thumb == grasp_index) {
        throw InvalidInputError("object context: thumb and index grasp points coincide");
    }
}

void validate_stream(std::span<const GazeSample> samples) {
    double previous = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const GazeSample& s = samples[i];
        if (!std::isfinite(s.t_ms) || s.t_ms < 0.0) {
            throw InvalidInputError("gaze sample " + std::to_string(i) + ": invalid timestamp");
        }
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
            throw InvalidInputError("gaze sample " + std::to_string(i) + ": non-finite position");
        }
        if (!(s.confidence >= 0.0 && s.confidence <= 1.0)) {
            throw InvalidInputError("gaze sample " + std::to_string(i) + ": confidence outside [0, 1]");
        }
        if (i > 0 && s.t_ms < previous) {
            throw InvalidInputError("gaze sample " + std::to_string(i) + ": timestamps are not sorted");
        }
        previous = s.t_ms;
    }
}

std::vector<Fixation> detect_fixations(std::span<const GazeSample> samples,
                                       const FixationDetectorConfig& config) {
    config.validate();
    validate_stream(samples);

    std::vector<GazeSample> kept;
    kept.reserve(samples.size());
    for (const GazeSample& s : samples) {
        if (s.confidence >= config.min_confidence) kept.push_back(s);
    }

    const double max_dispersion = config.dispersion_max_px();
    const std::size_t n = kept.size();
    std::vector<Fixation> fixations;

    // Adding a sample only needs its distance to the current members: the
    // pairwise bound already holds among them.
    auto fits = [&](std::size_t first, std::size_t last, std::size_t candidate) {
        if (kept[candidate].t_ms - kept[first].t_ms > config.dur_max_ms) return false;
        for (std::size_t m = first; m <= last; ++m) {
            if (std::hypot(kept[candidate].x - kept[m].x, kept[candidate].y - kept[m].y) >
                max_dispersion) {
                return false;
            }
        }
        return true;
    };

    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start;
        while (end + 1 < n && fits(start, end, end + 1)) ++end;

        const double duration = kept[end].t_ms - kept[start].t_ms;
        if (duration >= config.dur_min_ms) {
            double sx = 0.0;
            double sy = 0.0;
            for (std::size_t m = start; m <= end; ++m) {
                sx += kept[m].x;
                sy += kept[m].y;
            }
            const auto count = static_cast<double>(end - start + 1);
            fixations.push_back({kept[start].t_ms, duration, sx / count, sy / count});
            start = end + 1;
        } else {
            ++start;
        }
    }
    return fixations;
}

}  // namespace gazeintent
