#pragma once

#include "gazeintent/error.hpp"
#include "gazeintent/features.hpp"
#include "gazeintent/gaze.hpp"
#include "gazeintent/random.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace gazeintent {

enum class ClassifierKind { Knn, SvmLinear, SgdLogistic, DecisionTree };

inline constexpr std::array<ClassifierKind, 4> kAllKinds = {
    ClassifierKind::Knn, ClassifierKind::SvmLinear, ClassifierKind::SgdLogistic,
    ClassifierKind::DecisionTree};

/// CLI names: knn, svm, sgd, dtree.
std::string_view to_string(ClassifierKind kind);
ClassifierKind kind_from_string(std::string_view text);

/// Binary labels used by every classifier. GRASP is the positive class.
enum class Label { Grasp, View };

inline Label label_of(TaskLabel task) {
    if (task == TaskLabel::Unlabeled) throw InvalidInputError("unlabeled trial has no class label");
    return task == TaskLabel::Grasp ? Label::Grasp : Label::View;
}
inline TaskLabel task_of(Label label) {
    return label == Label::Grasp ? TaskLabel::Grasp : TaskLabel::View;
}

/// Row-major feature matrix with one label per row.
struct LabeledSet {
    std::size_t dim = 0;
    std::vector<double> values;
    std::vector<Label> labels;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
    void add(std::span<const double> x, Label y);
    LabeledSet subset(std::span<const std::size_t> indices) const;
};

LabeledSet make_labeled(std::span<const FeatureVector> features, std::span<const TaskLabel> labels,
                        Combination combination);

struct Hyperparameters {
    int knn_k = 5;
    double lambda = 1e-3;
    int epochs = 200;
    int max_depth = 5;
    int min_leaf = 2;
    std::uint64_t seed = 0;
};

/// Per-feature z-scoring fitted on training rows. Degenerate columns get std 1.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> std;

    static Standardization fit(const LabeledSet& data);
    std::vector<double> apply(std::span<const double> x) const;
};

struct KnnParams {
    int k = 5;
    std::vector<double> points;  ///< standardized training rows, row-major
    std::vector<Label> labels;
};

/// score = w . z + bias on standardized z; score >= 0 means GRASP.
struct LinearParams {
    std::vector<double> weights;
    double bias = 0.0;
};

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;   ///< taken when z[feature] <= threshold
    int right = -1;
    Label label = Label::Grasp;
};

struct TreeParams {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
    int depth() const;
};

struct TrainedModel {
    ClassifierKind kind = ClassifierKind::Knn;
    Combination combination = Combination::C4;
    Standardization standardization;
    std::variant<KnnParams, LinearParams, TreeParams> params;
    /// Regularized training objective after each epoch (linear kinds only,
    /// not persisted).
    std::vector<double> loss_history;

    std::size_t dim() const { return standardization.mean.size(); }
};

/// Throws InvalidInputError for a single-class or ragged training set.
TrainedModel train(ClassifierKind kind, Combination combination, const LabeledSet& data,
                   const Hyperparameters& hp = {});

/// Same fit on arbitrary feature columns, for single-feature ablations. The
/// model's `combination` is left at its default and carries no meaning.
TrainedModel train_columns(ClassifierKind kind, const LabeledSet& data, const Hyperparameters& hp = {});

/// KNN vote ties and zero linear scores resolve to GRASP.
Label predict(const TrainedModel& model, std::span<const double> x);

/// Decision score of a linear model (standardization applied).
double linear_score(const TrainedModel& model, std::span<const double> x);

double accuracy(const TrainedModel& model, const LabeledSet& data);

struct Confusion {
    std::size_t grasp_as_grasp = 0;
    std::size_t grasp_as_view = 0;
    std::size_t view_as_grasp = 0;
    std::size_t view_as_view = 0;

    Confusion& operator+=(const Confusion& other);
};

/// Accuracies of one evaluation. For a single k-fold run `fold_accuracies`
/// holds one entry per fold and mean/std are over folds. For repeated runs
/// `repeat_accuracies` holds one entry per repeat; `mean` is over all folds
/// and `std` over repeats. std is the population standard deviation.
struct EvalReport {
    std::vector<double> fold_accuracies;
    std::vector<double> repeat_accuracies;
    double mean = 0.0;
    double std = 0.0;
    std::size_t n_repeats = 0;
    Confusion confusion;
};

/// Stratified shuffled assignment of row indices into k folds whose sizes
/// differ by at most one. Throws if n < k or a class has fewer than 2 rows.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const Label> labels, std::size_t k,
                                                       Rng& rng);

struct FoldResult {
    std::vector<std::size_t> test_indices;
    TrainedModel model;
    double accuracy = 0.0;
    Confusion confusion;
};

/// One repeat of k-fold cross-validation, returning each fold's model.
std::vector<FoldResult> kfold_cv_detailed(const LabeledSet& data, std::size_t k,
                                          ClassifierKind kind, Combination combination,
                                          const Hyperparameters& hp, Rng& rng);

EvalReport kfold_cv(const LabeledSet& data, std::size_t k, ClassifierKind kind,
                    Combination combination, const Hyperparameters& hp, Rng& rng);

struct GridCell {
    Combination combination;
    ClassifierKind kind;
};

std::vector<GridCell> full_grid();

struct CellReport {
    GridCell cell;
    EvalReport test1;
    std::optional<EvalReport> test2;
};

struct RepeatedEvalOptions {
    std::size_t folds = 5;
    std::size_t n_repeats = 100;
    Hyperparameters hp;
    std::uint64_t seed = 0;
    unsigned threads = 0;  ///< 0: hardware concurrency
};

/// For every cell: n_repeats of k-fold CV on `train` (Test1) and, when test2
/// is given, a model fitted on all of `train` per repeat scored on test2.
/// Throws InvalidInputError if a shape occurs in both sets.
std::vector<CellReport> repeated_eval(std::span<const Trial> train, std::span<const Trial> test2,
                                      std::span<const GridCell> grid,
                                      const RepeatedEvalOptions& options);

}  // namespace gazeintent
