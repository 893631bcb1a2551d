#include "gazeintent/learn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <thread>

namespace gazeintent {

namespace {

double mean_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

Confusion score(const TrainedModel& model, const LabeledSet& data) {
    Confusion c;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Label got = predict(model, data.row(i));
        if (data.labels[i] == Label::Grasp) {
            (got == Label::Grasp ? c.grasp_as_grasp : c.grasp_as_view) += 1;
        } else {
            (got == Label::Grasp ? c.view_as_grasp : c.view_as_view) += 1;
        }
    }
    return c;
}

double accuracy_of(const Confusion& c) {
    const std::size_t total = c.grasp_as_grasp + c.grasp_as_view + c.view_as_grasp + c.view_as_view;
    if (total == 0) return 0.0;
    return static_cast<double>(c.grasp_as_grasp + c.view_as_view) / static_cast<double>(total);
}

std::uint64_t cell_stream(const GridCell& cell) {
    return 16 * static_cast<std::uint64_t>(cell.combination) + static_cast<std::uint64_t>(cell.kind);
}

}  // namespace

Confusion& Confusion::operator+=(const Confusion& other) {
    grasp_as_grasp += other.grasp_as_grasp;
    grasp_as_view += other.grasp_as_view;
    view_as_grasp += other.view_as_grasp;
    view_as_view += other.view_as_view;
    return *this;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const Label> labels, std::size_t k,
                                                       Rng& rng) {
    if (k < 2) throw InvalidInputError("cross-validation needs at least 2 folds");
    if (labels.size() < k) {
        throw InvalidInputError("cross-validation: " + std::to_string(labels.size()) +
                                " rows cannot fill " + std::to_string(k) + " folds");
    }
    std::vector<std::size_t> grasp;
    std::vector<std::size_t> view;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == Label::Grasp ? grasp : view).push_back(i);
    }
    if (grasp.size() < 2 || view.size() < 2) {
        throw InvalidInputError(
            "cross-validation: each class needs at least 2 rows so every training part has both");
    }
    std::shuffle(grasp.begin(), grasp.end(), rng);
    std::shuffle(view.begin(), view.end(), rng);

    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t cursor = 0;
    for (const auto* group : {&grasp, &view}) {
        for (std::size_t i : *group) {
            folds[cursor % k].push_back(i);
            ++cursor;
        }
    }
    return folds;
}

std::vector<FoldResult> kfold_cv_detailed(const LabeledSet& data, std::size_t k,
                                          ClassifierKind kind, Combination combination,
                                          const Hyperparameters& hp, Rng& rng) {
    const auto folds = stratified_folds(data.labels, k, rng);
    std::vector<FoldResult> results;
    results.reserve(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t g = 0; g < k; ++g) {
            if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(train_idx.begin(), train_idx.end());
        std::vector<std::size_t> test_idx = folds[f];
        std::sort(test_idx.begin(), test_idx.end());

        Hyperparameters fold_hp = hp;
        fold_hp.seed = rng();
        FoldResult r;
        r.model = train(kind, combination, data.subset(train_idx), fold_hp);
        r.confusion = score(r.model, data.subset(test_idx));
        r.accuracy = accuracy_of(r.confusion);
        r.test_indices = std::move(test_idx);
        results.push_back(std::move(r));
    }
    return results;
}

EvalReport kfold_cv(const LabeledSet& data, std::size_t k, ClassifierKind kind,
                    Combination combination, const Hyperparameters& hp, Rng& rng) {
    EvalReport report;
    for (FoldResult& r : kfold_cv_detailed(data, k, kind, combination, hp, rng)) {
        report.fold_accuracies.push_back(r.accuracy);
        report.confusion += r.confusion;
    }
    report.mean = mean_of(report.fold_accuracies);
    report.std = population_std(report.fold_accuracies);
    report.repeat_accuracies = {report.mean};
    report.n_repeats = 1;
    return report;
}

std::vector<GridCell> full_grid() {
    std::vector<GridCell> grid;
    for (Combination c : kAllCombinations) {
        for (ClassifierKind k : kAllKinds) grid.push_back({c, k});
    }
    return grid;
}

std::vector<CellReport> repeated_eval(std::span<const Trial> train_trials,
                                      std::span<const Trial> test2_trials,
                                      std::span<const GridCell> grid,
                                      const RepeatedEvalOptions& options) {
    if (options.n_repeats == 0) throw InvalidInputError("repeated_eval: n_repeats must be positive");

    std::set<std::string> train_shapes;
    for (const Trial& t : train_trials) train_shapes.insert(t.object.shape_id);
    for (const Trial& t : test2_trials) {
        if (train_shapes.count(t.object.shape_id) != 0) {
            throw InvalidInputError("repeated_eval: shape '" + t.object.shape_id +
                                    "' appears in both the training set and test2");
        }
    }

    auto featurize = [](std::span<const Trial> trials) {
        std::vector<FeatureVector> features;
        std::vector<TaskLabel> labels;
        for (const Trial& t : trials) {
            features.push_back(compute_features(t.fixations, t.object));
            labels.push_back(t.task_label);
        }
        return std::pair{std::move(features), std::move(labels)};
    };
    const auto [train_features, train_labels] = featurize(train_trials);
    const auto [test2_features, test2_labels] = featurize(test2_trials);
    const bool has_test2 = !test2_trials.empty();

    std::vector<CellReport> reports(grid.size());
    auto run_cell = [&](std::size_t index) {
        const GridCell cell = grid[index];
        const LabeledSet data = make_labeled(train_features, train_labels, cell.combination);
        const LabeledSet held_out =
            has_test2 ? make_labeled(test2_features, test2_labels, cell.combination) : LabeledSet{};

        CellReport report{cell, {}, std::nullopt};
        EvalReport test2;
        for (std::size_t r = 0; r < options.n_repeats; ++r) {
            Rng rng = derive_rng(options.seed, cell_stream(cell), r);
            const EvalReport once =
                kfold_cv(data, options.folds, cell.kind, cell.combination, options.hp, rng);
            report.test1.fold_accuracies.insert(report.test1.fold_accuracies.end(),
                                                once.fold_accuracies.begin(),
                                                once.fold_accuracies.end());
            report.test1.repeat_accuracies.push_back(once.mean);
            report.test1.confusion += once.confusion;

            if (has_test2) {
                Hyperparameters hp = options.hp;
                hp.seed = rng();
                const TrainedModel model = train(cell.kind, cell.combination, data, hp);
                const Confusion c = score(model, held_out);
                test2.confusion += c;
                test2.repeat_accuracies.push_back(accuracy_of(c));
            }
        }
        report.test1.n_repeats = options.n_repeats;
        report.test1.mean = mean_of(report.test1.fold_accuracies);
        report.test1.std = population_std(report.test1.repeat_accuracies);
        if (has_test2) {
            test2.fold_accuracies = test2.repeat_accuracies;
            test2.n_repeats = options.n_repeats;
            test2.mean = mean_of(test2.repeat_accuracies);
            test2.std = population_std(test2.repeat_accuracies);
            report.test2 = std::move(test2);
        }
        reports[index] = std::move(report);
    };

    unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(grid.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) run_cell(i);
        return reports;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < grid.size() && !failed; i = next++) {
                    try {
                        run_cell(i);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return reports;
}

}  // namespace gazeintent
