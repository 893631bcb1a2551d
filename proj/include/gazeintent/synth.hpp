#pragma once

#include "gazeintent/gaze.hpp"
#include "gazeintent/random.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gazeintent {

enum class GraspAxis { Horizontal, Vertical };

std::string_view to_string(GraspAxis axis);
GraspAxis grasp_axis_from_string(std::string_view text);

/// Axis of the grasp encoded in a context: horizontal when the thumb-index
/// segment is wider than it is tall.
GraspAxis grasp_axis_of(const ObjectContext& context);

/// Nominal geometry of one stimulus shape. Outline coordinates are relative
/// to the centroid in units of the grasp offset (contact edges at +-1 along
/// the grasp axis), image convention: y grows downwards.
struct ShapeSpec {
    std::string id;
    std::vector<GraspAxis> axes;
    bool held_out = false;
    std::vector<Point2> outline;
};

/// Training shapes (square, cross, four T orientations) followed by the
/// held-out shapes (triangle, two bar orientations).
const std::vector<ShapeSpec>& shape_catalog();
const ShapeSpec& find_shape(std::string_view id);

enum class GraspAnchor { IndexPoint };

struct SynthConfig {
    std::size_t n_per_class = 320;
    std::size_t n_test_per_class = 30;
    double grasp_count_mean = 8.18;
    double grasp_count_std = 0.99;
    double view_count_mean = 8.62;
    double view_count_std = 0.76;
    double target_var_grasp = 29.85;
    double target_var_view = 256.67;
    GraspAnchor grasp_anchor = GraspAnchor::IndexPoint;
    std::uint64_t seed = 0;
    std::vector<std::string> train_shapes = {"square", "cross", "T-up", "T-down", "T-left", "T-right"};
    std::vector<std::string> test_shapes = {"triangle", "bar-h", "bar-v"};
    Point2 scene_center{320.0, 240.0};
    double placement_jitter_px = 40.0;
    double fixation_dur_min_ms = 80.0;
    double fixation_dur_max_ms = 400.0;
    double saccade_gap_min_ms = 30.0;
    double saccade_gap_max_ms = 80.0;

    void validate() const;
};

/// Per-axis std of an isotropic 2D Gaussian whose fixation-distance variance
/// equals target_var in the large-count limit: Var(d) = (2 - pi/2) sigma^2.
double calibrate_sigma(double target_var);

/// E[VAR] of n i.i.d. fixations relative to the large-count limit. VAR is
/// measured around the sample mean, so small n shrinks it (n = 2 gives 0).
double finite_count_factor(int n);

/// Distribution of fixation counts: round(N(mean, std)) clamped to >= 2.
struct CountModel {
    double mean = 0.0;
    double std = 0.0;

    int draw(Rng& rng) const;
    double probability(int n) const;
    double expectation_of_inverse() const;
    double expected_finite_count_factor() const;
};

/// Mean distance from the origin-offset point nu of a 2D isotropic Gaussian
/// with per-axis std sigma (the Rice mean).
double rice_mean(double nu, double sigma);

/// Generator parameters derived from a SynthConfig.
struct Calibration {
    double sigma_grasp = 0.0;       ///< per-axis spread of GRASP fixations
    double sigma_view = 0.0;        ///< per-axis spread of VIEW fixations
    double grasp_offset_px = 0.0;   ///< |grasp point - centroid|
    double anchor_jitter_px = 0.0;  ///< per-trial spread of the GRASP gaze anchor
};

Calibration calibrate(const SynthConfig& config);

struct SynthDataset {
    std::vector<Trial> train;
    std::vector<Trial> test2;
};

class TrialGenerator {
public:
    explicit TrialGenerator(SynthConfig config);

    const SynthConfig& config() const { return config_; }
    const Calibration& calibration() const { return calibration_; }

    /// Context for a shape placed with its centroid at `center`.
    ObjectContext context_for(const ShapeSpec& shape, GraspAxis axis, Point2 center) const;

    /// One labeled trial. The grasp axis is drawn among the shape's axes and
    /// the object is placed with uniform jitter around the scene center.
    Trial generate_trial(TaskLabel task, std::string_view shape, Rng& rng) const;

    /// Fixations for one trial against a fixed context, starting at t_offset_ms.
    std::vector<Fixation> generate_fixations(TaskLabel task, const ObjectContext& context,
                                             double t_offset_ms, Rng& rng) const;

    /// Back-to-back trials of one task on one object until at least
    /// min_duration_ms of fixation data exists. Used for stream replays.
    Trial generate_recording(TaskLabel task, std::string_view shape, double min_duration_ms,
                             Rng& rng) const;

private:
    SynthConfig config_;
    Calibration calibration_;
    CountModel grasp_counts_;
    CountModel view_counts_;
};

/// n_per_class trials per label over the training shapes, and
/// n_test_per_class per label over the held-out shapes. Deterministic in
/// config.seed.
SynthDataset generate_dataset(const SynthConfig& config);

/// Expands fixations into a gaze stream sampled at rate_hz: constant-position
/// runs inside each fixation and no samples during the saccade gaps.
std::vector<GazeSample> rasterize(const Trial& trial, double rate_hz = 120.0);

}  // namespace gazeintent
