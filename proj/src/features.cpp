#include "gazeintent/features.hpp"

#include "gazeintent/error.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace gazeintent {

namespace {

void require_fixations(std::span<const Fixation> fixations, const char* what) {
    if (fixations.empty()) {
        throw InsufficientDataError(std::string(what) + ": at least one fixation is required");
    }
}

double mean_distance(std::span<const Fixation> fixations, Point2 target) {
    double sum = 0.0;
    for (const Fixation& f : fixations) sum += distance(f.position(), target);
    return sum / static_cast<double>(fixations.size());
}

}  // namespace

std::string_view to_string(Combination combination) {
    switch (combination) {
        case Combination::C1: return "c1";
        case Combination::C2: return "c2";
        case Combination::C3: return "c3";
        case Combination::C4: return "c4";
        case Combination::C5: return "c5";
    }
    return "c5";
}

Combination combination_from_string(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (Combination c : kAllCombinations) {
        if (to_string(c) == lower) return c;
    }
    throw InvalidInputError("unknown feature combination '" + std::string(text) + "'");
}

std::string_view to_string(Feature feature) {
    switch (feature) {
        case Feature::Adf2c: return "adf2c";
        case Feature::Adf2i: return "adf2i";
        case Feature::Adf2t: return "adf2t";
        case Feature::Var: return "var";
    }
    return "var";
}

std::vector<Feature> members(Combination combination) {
    switch (combination) {
        case Combination::C1: return {Feature::Adf2t, Feature::Var};
        case Combination::C2: return {Feature::Adf2i, Feature::Var};
        case Combination::C3: return {Feature::Adf2c, Feature::Adf2t, Feature::Var};
        case Combination::C4: return {Feature::Adf2c, Feature::Adf2i, Feature::Var};
        case Combination::C5: return {Feature::Adf2c, Feature::Adf2i, Feature::Adf2t, Feature::Var};
    }
    return {};
}

double value_of(const FeatureVector& features, Feature feature) {
    switch (feature) {
        case Feature::Adf2c: return features.adf2c;
        case Feature::Adf2i: return features.adf2i;
        case Feature::Adf2t: return features.adf2t;
        case Feature::Var: return features.var;
    }
    return 0.0;
}

double adf2c(std::span<const Fixation> fixations, Point2 centroid) {
    require_fixations(fixations, "adf2c");
    return mean_distance(fixations, centroid);
}

GraspDistances grasp_distances(std::span<const Fixation> fixations, const ObjectContext& context) {
    require_fixations(fixations, "grasp_distances");
    return {mean_distance(fixations, context.grasp_thumb), mean_distance(fixations, context.grasp_index)};
}

double var_of_distances(std::span<const Fixation> fixations) {
    require_fixations(fixations, "var_of_distances");
    const auto n = static_cast<double>(fixations.size());

    Point2 center;
    for (const Fixation& f : fixations) {
        center.x += f.x;
        center.y += f.y;
    }
    center.x /= n;
    center.y /= n;

    std::vector<double> d;
    d.reserve(fixations.size());
    double mean = 0.0;
    for (const Fixation& f : fixations) {
        d.push_back(distance(f.position(), center));
        mean += d.back();
    }
    mean /= n;

    double ss = 0.0;
    for (double di : d) ss += (di - mean) * (di - mean);
    return ss / n;
}

FeatureVector compute_features(std::span<const Fixation> fixations, const ObjectContext& context) {
    require_fixations(fixations, "compute_features");
    context.validate();
    const GraspDistances g = grasp_distances(fixations, context);
    return {adf2c(fixations, context.centroid), g.adf2t, g.adf2i, var_of_distances(fixations),
            fixations.size()};
}

std::vector<double> project(const FeatureVector& features, Combination combination) {
    std::vector<double> out;
    for (Feature f : members(combination)) out.push_back(value_of(features, f));
    return out;
}

std::vector<double> extract(const Trial& trial, Combination combination) {
    return project(compute_features(trial.fixations, trial.object), combination);
}

}  // namespace gazeintent
