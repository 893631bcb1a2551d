#pragma once

#include "gazeintent/features.hpp"
#include "gazeintent/learn.hpp"
#include "gazeintent/synth.hpp"

#include <memory>

namespace test_support {

/// A model trained on a default-configured synthetic training set.
inline std::shared_ptr<const gazeintent::TrainedModel> synthetic_model(
    std::uint64_t seed, gazeintent::ClassifierKind kind = gazeintent::ClassifierKind::Knn,
    gazeintent::Combination combination = gazeintent::Combination::C4) {
    using namespace gazeintent;
    SynthConfig config;
    config.seed = seed;
    const SynthDataset data = generate_dataset(config);
    std::vector<FeatureVector> features;
    std::vector<TaskLabel> labels;
    for (const Trial& t : data.train) {
        features.push_back(compute_features(t.fixations, t.object));
        labels.push_back(t.task_label);
    }
    Hyperparameters hp;
    hp.seed = seed;
    return std::make_shared<const TrainedModel>(
        train(kind, combination, make_labeled(features, labels, combination), hp));
}

}  // namespace test_support
