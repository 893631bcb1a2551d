#include "gazeintent/learn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

namespace gazeintent {

namespace {

double sign_of(Label y) { return y == Label::Grasp ? 1.0 : -1.0; }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_dimension(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.dim()) {
        throw InvalidInputError("feature vector has " + std::to_string(x.size()) +
                                " entries, model expects " + std::to_string(model.dim()));
    }
}

// ---------------------------------------------------------------------------
// KNN

KnnParams fit_knn(const LabeledSet& z, int k) {
    if (k < 1) throw InvalidInputError("knn: k must be at least 1");
    return {k, z.values, z.labels};
}

Label predict_knn(const KnnParams& p, std::span<const double> z) {
    const std::size_t dim = z.size();
    const std::size_t n = p.labels.size();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double diff = p.points[i * dim + j] - z[j];
            d2 += diff * diff;
        }
        dist[i] = {d2, i};
    }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(p.k), n);
    // Distance ties at the k-th neighbour resolve by training order.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::size_t grasp_votes = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (p.labels[dist[i].second] == Label::Grasp) ++grasp_votes;
    }
    return 2 * grasp_votes >= k ? Label::Grasp : Label::View;
}

// ---------------------------------------------------------------------------
// Linear models: stochastic (sub)gradient steps with eta_t = 1 / (lambda t)
// over standardized rows augmented with a constant 1 (the bias is part of the
// regularized weight vector). Iterates are projected onto the ball that must
// contain the optimum. An epoch whose end objective is worse than the last
// accepted one is rolled back, so the recorded objective never increases.

enum class Loss { Hinge, Logistic };

double loss_value(Loss loss, double margin) {
    if (loss == Loss::Hinge) return std::max(0.0, 1.0 - margin);
    // log(1 + exp(-m)) without overflow
    return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

// d loss / d margin
double loss_slope(Loss loss, double margin) {
    if (loss == Loss::Hinge) return margin < 1.0 ? -1.0 : 0.0;
    return -1.0 / (1.0 + std::exp(margin));
}

double objective(Loss loss, const std::vector<double>& w, const LabeledSet& z, double lambda) {
    const std::size_t dim = z.dim;
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto row = z.row(i);
        const double margin = sign_of(z.labels[i]) * (dot(row, {w.data(), dim}) + w[dim]);
        total += loss_value(loss, margin);
    }
    return 0.5 * lambda * dot(w, w) + total / static_cast<double>(z.size());
}

LinearParams fit_linear(Loss loss, const LabeledSet& z, const Hyperparameters& hp,
                        std::vector<double>& history) {
    if (!(hp.lambda > 0.0) || hp.epochs < 1) {
        throw InvalidInputError("linear model: lambda must be positive and epochs >= 1");
    }
    const std::size_t dim = z.dim;
    const std::size_t n = z.size();
    const double lambda = hp.lambda;
    // Objective at w = 0 bounds lambda/2 |w*|^2.
    const double radius =
        std::sqrt(2.0 * (loss == Loss::Hinge ? 1.0 : std::log(2.0)) / lambda);

    std::vector<double> w(dim + 1, 0.0);
    std::vector<double> accepted = w;
    double best = objective(loss, w, z, lambda);

    Rng rng(hp.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::uint64_t t = 0;

    history.clear();
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const auto row = z.row(i);
            const double y = sign_of(z.labels[i]);
            const double margin = y * (dot(row, {w.data(), dim}) + w[dim]);
            const double slope = loss_slope(loss, margin);
            const double shrink = 1.0 - eta * lambda;
            for (double& wj : w) wj *= shrink;
            if (slope != 0.0) {
                for (std::size_t j = 0; j < dim; ++j) w[j] -= eta * slope * y * row[j];
                w[dim] -= eta * slope * y;
            }
            const double norm = std::sqrt(dot(w, w));
            if (norm > radius) {
                for (double& wj : w) wj *= radius / norm;
            }
        }
        const double current = objective(loss, w, z, lambda);
        if (current <= best) {
            best = current;
            accepted = w;
        } else {
            w = accepted;
        }
        history.push_back(best);
    }

    LinearParams params;
    params.weights.assign(accepted.begin(), accepted.begin() + static_cast<std::ptrdiff_t>(dim));
    params.bias = accepted[dim];
    return params;
}

// ---------------------------------------------------------------------------
// CART with Gini impurity.

double gini(std::size_t grasp, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(grasp) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

Label majority(std::size_t grasp, std::size_t total) {
    return 2 * grasp >= total ? Label::Grasp : Label::View;
}

struct TreeBuilder {
    const LabeledSet& z;
    int max_depth;
    std::size_t min_leaf;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t> idx, int depth) {
        std::size_t grasp = 0;
        for (std::size_t i : idx) grasp += z.labels[i] == Label::Grasp ? 1 : 0;
        const std::size_t total = idx.size();

        const int id = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[id].label = majority(grasp, total);
        if (depth >= max_depth || grasp == 0 || grasp == total || total < 2 * min_leaf) return id;

        const double parent = gini(grasp, total);
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, Label>> column(total);
        for (std::size_t f = 0; f < z.dim; ++f) {
            for (std::size_t r = 0; r < total; ++r) {
                column[r] = {z.values[idx[r] * z.dim + f], z.labels[idx[r]]};
            }
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::size_t left_grasp = 0;
            for (std::size_t r = 0; r + 1 < total; ++r) {
                left_grasp += column[r].second == Label::Grasp ? 1 : 0;
                const std::size_t left = r + 1;
                const std::size_t right = total - left;
                if (column[r].first == column[r + 1].first) continue;
                if (left < min_leaf || right < min_leaf) continue;
                const double weighted =
                    (static_cast<double>(left) * gini(left_grasp, left) +
                     static_cast<double>(right) * gini(grasp - left_grasp, right)) /
                    static_cast<double>(total);
                const double gain = parent - weighted;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (column[r].first + column[r + 1].first);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left_idx;
        std::vector<std::size_t> right_idx;
        for (std::size_t i : idx) {
            (z.values[i * z.dim + static_cast<std::size_t>(best_feature)] <= best_threshold ? left_idx
                                                                                             : right_idx)
                .push_back(i);
        }
        nodes[id].feature = best_feature;
        nodes[id].threshold = best_threshold;
        const int left = build(std::move(left_idx), depth + 1);
        const int right = build(std::move(right_idx), depth + 1);
        nodes[id].left = left;
        nodes[id].right = right;
        return id;
    }
};

TreeParams fit_tree(const LabeledSet& z, const Hyperparameters& hp) {
    if (hp.max_depth < 0 || hp.min_leaf < 1) {
        throw InvalidInputError("decision tree: max_depth >= 0 and min_leaf >= 1 required");
    }
    TreeBuilder builder{z, hp.max_depth, static_cast<std::size_t>(hp.min_leaf), {}};
    std::vector<std::size_t> all(z.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    builder.build(std::move(all), 0);
    return {std::move(builder.nodes)};
}

Label predict_tree(const TreeParams& p, std::span<const double> z) {
    int node = 0;
    while (p.nodes[node].feature >= 0) {
        const TreeNode& n = p.nodes[node];
        node = z[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return p.nodes[node].label;
}

int subtree_depth(const TreeParams& p, int node) {
    const TreeNode& n = p.nodes[node];
    if (n.feature < 0) return 0;
    return 1 + std::max(subtree_depth(p, n.left), subtree_depth(p, n.right));
}

}  // namespace

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Knn: return "knn";
        case ClassifierKind::SvmLinear: return "svm";
        case ClassifierKind::SgdLogistic: return "sgd";
        case ClassifierKind::DecisionTree: return "dtree";
    }
    return "knn";
}

ClassifierKind kind_from_string(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (ClassifierKind k : kAllKinds) {
        if (to_string(k) == lower) return k;
    }
    throw InvalidInputError("unknown classifier kind '" + std::string(text) + "'");
}

void LabeledSet::add(std::span<const double> x, Label y) {
    if (dim == 0 && labels.empty()) dim = x.size();
    if (x.size() != dim) {
        throw InvalidInputError("labeled set: row has " + std::to_string(x.size()) +
                                " entries, expected " + std::to_string(dim));
    }
    values.insert(values.end(), x.begin(), x.end());
    labels.push_back(y);
}

LabeledSet LabeledSet::subset(std::span<const std::size_t> indices) const {
    LabeledSet out;
    out.dim = dim;
    out.values.reserve(indices.size() * dim);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        const auto r = row(i);
        out.values.insert(out.values.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
    }
    return out;
}

LabeledSet make_labeled(std::span<const FeatureVector> features, std::span<const TaskLabel> labels,
                        Combination combination) {
    if (features.size() != labels.size()) {
        throw InvalidInputError("make_labeled: feature and label counts differ");
    }
    LabeledSet out;
    out.dim = members(combination).size();
    for (std::size_t i = 0; i < features.size(); ++i) {
        out.add(project(features[i], combination), label_of(labels[i]));
    }
    return out;
}

Standardization Standardization::fit(const LabeledSet& data) {
    Standardization s;
    s.mean.assign(data.dim, 0.0);
    s.std.assign(data.dim, 0.0);
    const auto n = static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.dim; ++j) s.mean[j] += data.values[i * data.dim + j];
    }
    for (double& m : s.mean) m /= n;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.dim; ++j) {
            const double d = data.values[i * data.dim + j] - s.mean[j];
            s.std[j] += d * d;
        }
    }
    for (double& v : s.std) {
        v = std::sqrt(v / n);
        if (!(v > 1e-12)) v = 1.0;
    }
    return s;
}

std::vector<double> Standardization::apply(std::span<const double> x) const {
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / std[j];
    return z;
}

int TreeParams::depth() const { return nodes.empty() ? 0 : subtree_depth(*this, 0); }

TrainedModel train(ClassifierKind kind, Combination combination, const LabeledSet& data,
                   const Hyperparameters& hp) {
    if (data.dim != members(combination).size()) {
        throw InvalidInputError("train: feature width does not match combination " +
                                std::string(to_string(combination)));
    }
    TrainedModel model = train_columns(kind, data, hp);
    model.combination = combination;
    return model;
}

TrainedModel train_columns(ClassifierKind kind, const LabeledSet& data, const Hyperparameters& hp) {
    if (data.size() == 0) throw InvalidInputError("train: empty training set");
    if (data.dim == 0 || data.values.size() != data.dim * data.size()) {
        throw InvalidInputError("train: ragged or zero-width feature matrix");
    }
    const auto grasp = static_cast<std::size_t>(
        std::count(data.labels.begin(), data.labels.end(), Label::Grasp));
    if (grasp == 0 || grasp == data.size()) {
        throw InvalidInputError("train: both GRASP and VIEW examples are required");
    }

    TrainedModel model;
    model.kind = kind;
    model.standardization = Standardization::fit(data);

    LabeledSet z;
    z.dim = data.dim;
    z.labels = data.labels;
    z.values.reserve(data.values.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = model.standardization.apply(data.row(i));
        z.values.insert(z.values.end(), row.begin(), row.end());
    }

    switch (kind) {
        case ClassifierKind::Knn: model.params = fit_knn(z, hp.knn_k); break;
        case ClassifierKind::SvmLinear:
            model.params = fit_linear(Loss::Hinge, z, hp, model.loss_history);
            break;
        case ClassifierKind::SgdLogistic:
            model.params = fit_linear(Loss::Logistic, z, hp, model.loss_history);
            break;
        case ClassifierKind::DecisionTree: model.params = fit_tree(z, hp); break;
    }
    return model;
}

double linear_score(const TrainedModel& model, std::span<const double> x) {
    check_dimension(model, x);
    const auto* p = std::get_if<LinearParams>(&model.params);
    if (p == nullptr) throw InvalidInputError("linear_score: model is not linear");
    const auto z = model.standardization.apply(x);
    return dot(z, p->weights) + p->bias;
}

Label predict(const TrainedModel& model, std::span<const double> x) {
    check_dimension(model, x);
    const auto z = model.standardization.apply(x);
    return std::visit(
        [&](const auto& p) -> Label {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, KnnParams>) {
                return predict_knn(p, z);
            } else if constexpr (std::is_same_v<P, LinearParams>) {
                return dot(z, p.weights) + p.bias >= 0.0 ? Label::Grasp : Label::View;
            } else {
                return predict_tree(p, z);
            }
        },
        model.params);
}

double accuracy(const TrainedModel& model, const LabeledSet& data) {
    if (data.size() == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (predict(model, data.row(i)) == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace gazeintent
