#pragma once

#include "gazeintent/gaze.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace gazeintent {

/// Per-trial (or per-window) fixation features, in scene pixels.
struct FeatureVector {
    double adf2c = 0.0;  ///< mean distance to the object centroid
    double adf2t = 0.0;  ///< mean distance to the thumb grasp point
    double adf2i = 0.0;  ///< mean distance to the index-finger grasp point
    double var = 0.0;    ///< variance of distances to the fixation mean (px^2)
    std::size_t n_fix = 0;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class Feature { Adf2c, Adf2i, Adf2t, Var };

/// The five feature subsets compared for intention recognition.
enum class Combination { C1, C2, C3, C4, C5 };

inline constexpr std::array<Combination, 5> kAllCombinations = {
    Combination::C1, Combination::C2, Combination::C3, Combination::C4, Combination::C5};

std::string_view to_string(Combination combination);
/// Accepts "c1".."c5" (case-insensitive).
Combination combination_from_string(std::string_view text);

std::string_view to_string(Feature feature);

/// Members of a combination in canonical order: ADF2C, ADF2I, ADF2T, VAR.
std::vector<Feature> members(Combination combination);

double value_of(const FeatureVector& features, Feature feature);

struct GraspDistances {
    double adf2t = 0.0;
    double adf2i = 0.0;
};

/// Mean Euclidean distance from the fixations to the centroid.
/// Throws InsufficientDataError on an empty sequence.
double adf2c(std::span<const Fixation> fixations, Point2 centroid);

/// Mean distances to the thumb (adf2t) and index-finger (adf2i) grasp points.
GraspDistances grasp_distances(std::span<const Fixation> fixations, const ObjectContext& context);

/// Population variance of the distances from each fixation to the mean
/// fixation position.
double var_of_distances(std::span<const Fixation> fixations);

FeatureVector compute_features(std::span<const Fixation> fixations, const ObjectContext& context);

/// Projection of a feature vector onto a combination, canonical order.
std::vector<double> project(const FeatureVector& features, Combination combination);

/// compute_features followed by project.
std::vector<double> extract(const Trial& trial, Combination combination);

}  // namespace gazeintent
