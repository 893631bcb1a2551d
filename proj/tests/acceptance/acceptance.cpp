// Acceptance suite: one PASS/FAIL line per headline requirement, nonzero exit
// status if any of them fails.

#include "gazeintent/features.hpp"
#include "gazeintent/gaze.hpp"
#include "gazeintent/io.hpp"
#include "gazeintent/learn.hpp"
#include "gazeintent/stats.hpp"
#include "gazeintent/stream.hpp"
#include "gazeintent/synth.hpp"

#include "feature_oracle.hpp"
#include "fixation_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

using namespace gazeintent;

namespace {

constexpr std::uint64_t kSeed = 20240607;

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void fail(const std::string& why) {
        if (outcome_.pass) outcome_.detail = why;
        outcome_.pass = false;
    }
    void require(bool ok, const std::string& why) {
        if (!ok) fail(why);
    }
    void note(const std::string& text) {
        if (outcome_.pass) outcome_.detail = text;
    }
    Outcome result() const { return outcome_; }

private:
    Outcome outcome_;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream out;
    out.precision(digits);
    out << v;
    return out.str();
}

int failures = 0;

void run(const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.fail(std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > budget_s) check.fail("took " + fmt(elapsed) + " s, budget " + fmt(budget_s) + " s");
    const Outcome o = check.result();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << fmt(elapsed, 3) << " s] " << o.detail
              << std::endl;
}

const SynthDataset& dataset() {
    static const SynthDataset d = [] {
        SynthConfig config;
        config.seed = kSeed;
        return generate_dataset(config);
    }();
    return d;
}

LabeledSet labeled(std::span<const Trial> trials, Combination c) {
    std::vector<FeatureVector> f;
    std::vector<TaskLabel> y;
    for (const Trial& t : trials) {
        f.push_back(compute_features(t.fixations, t.object));
        y.push_back(t.task_label);
    }
    return make_labeled(f, y, c);
}

// Mean accuracy of repeated stratified k-fold CV, fitting with `fit`.
double cv_accuracy(const LabeledSet& data, int repeats,
                   const std::function<TrainedModel(const LabeledSet&, std::uint64_t)>& fit,
                   std::uint64_t seed) {
    double sum = 0;
    int n = 0;
    for (int r = 0; r < repeats; ++r) {
        Rng rng = derive_rng(seed, 7, static_cast<std::uint64_t>(r));
        const auto folds = stratified_folds(data.labels, 5, rng);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            std::vector<std::size_t> train_idx;
            for (std::size_t g = 0; g < folds.size(); ++g) {
                if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
            }
            const TrainedModel m = fit(data.subset(train_idx), rng());
            sum += accuracy(m, data.subset(folds[f]));
            ++n;
        }
    }
    return sum / n;
}

std::vector<std::vector<double>> task_groups(std::span<const Trial> trials, Feature feature) {
    std::vector<std::vector<double>> g(2);
    for (const Trial& t : trials) {
        g[t.task_label == TaskLabel::Grasp ? 0 : 1].push_back(
            value_of(compute_features(t.fixations, t.object), feature));
    }
    return g;
}

// ---------------------------------------------------------------------------

void feature_oracle(Check& check) {
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> coord(-500, 1500);
    std::uniform_int_distribution<int> count(1, 40);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const ObjectContext ctx{{coord(rng), coord(rng)}, {coord(rng), coord(rng)}, {coord(rng), coord(rng)}, "x"};
        std::vector<Fixation> fix;
        std::vector<oracle::Pt> pts;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            fix.push_back({i * 300.0, 200, coord(rng), coord(rng)});
            pts.push_back({fix.back().x, fix.back().y});
        }
        const FeatureVector got = compute_features(fix, ctx);
        const long double want[] = {oracle::mean_distance(pts, {ctx.centroid.x, ctx.centroid.y}),
                                    oracle::mean_distance(pts, {ctx.grasp_index.x, ctx.grasp_index.y}),
                                    oracle::mean_distance(pts, {ctx.grasp_thumb.x, ctx.grasp_thumb.y}),
                                    oracle::var_of_distances(pts)};
        const double values[] = {got.adf2c, got.adf2i, got.adf2t, got.var};
        for (int k = 0; k < 4; ++k) {
            if (!oracle::close_rel(values[k], want[k], 1e-9L)) {
                check.fail("trial " + std::to_string(trial) + " feature " + std::to_string(k) + " differs");
            }
            if (want[k] != 0) {
                worst = std::max(worst, static_cast<double>(std::fabs((values[k] - want[k]) / want[k])));
            }
        }
        check.require(got.n_fix == static_cast<std::size_t>(n), "n_fix mismatch");
    }
    check.note("1000 trials, worst relative error " + fmt(worst, 3));
}

std::vector<GazeSample> random_stream(std::mt19937_64& rng) {
    // Coordinates on a 1/64 px grid so that integer shifts are exact.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    auto grid = [](double v) { return std::round(v * 64.0) / 64.0; };
    std::vector<GazeSample> out;
    double t = 0;
    double cx = 320;
    double cy = 240;
    const int count = 40 + static_cast<int>(u(rng) * 160);
    const double spread = 3 + u(rng) * 50;
    const double step = 4 + std::floor(u(rng) * 14);
    for (int i = 0; i < count; ++i) {
        if (u(rng) < 0.04) {
            cx = u(rng) * 640;
            cy = u(rng) * 480;
        }
        t += u(rng) < 0.05 ? step * 3 : step;  // occasional dropout
        out.push_back({t, grid(cx + spread * n(rng)), grid(cy + spread * n(rng)), u(rng) < 0.1 ? 0.2 : 0.9});
    }
    return out;
}

void detector_properties(Check& check) {
    const FixationDetectorConfig cfg;
    const double bound = cfg.dispersion_max_px();
    std::mt19937_64 rng(kSeed + 1);
    std::size_t total = 0;
    double worst_shift = 0;
    for (int s = 0; s < 10000; ++s) {
        const auto stream = random_stream(rng);
        const auto fix = detect_fixations(stream, cfg);
        total += fix.size();
        for (std::size_t k = 0; k < fix.size(); ++k) {
            const Fixation& f = fix[k];
            if (f.duration_ms < cfg.dur_min_ms || f.duration_ms > cfg.dur_max_ms) {
                check.fail("stream " + std::to_string(s) + ": duration " + fmt(f.duration_ms));
            }
            if (k > 0 && f.t_start_ms <= fix[k - 1].t_start_ms + fix[k - 1].duration_ms) {
                check.fail("stream " + std::to_string(s) + ": overlapping fixations");
            }
            std::vector<GazeSample> members;
            for (const GazeSample& g : stream) {
                if (g.confidence >= cfg.min_confidence && g.t_ms >= f.t_start_ms &&
                    g.t_ms <= f.t_start_ms + f.duration_ms) {
                    members.push_back(g);
                }
            }
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    if (distance({members[i].x, members[i].y}, {members[j].x, members[j].y}) > bound) {
                        check.fail("stream " + std::to_string(s) + ": dispersion bound violated");
                    }
                }
            }
        }

        // Translation by integers: identical segmentation, positions shifted.
        const double dx = std::floor(std::uniform_real_distribution<double>(-300, 300)(rng));
        const double dy = std::floor(std::uniform_real_distribution<double>(-300, 300)(rng));
        auto moved = stream;
        for (auto& g : moved) {
            g.x += dx;
            g.y += dy;
        }
        const auto fix2 = detect_fixations(moved, cfg);
        if (fix2.size() != fix.size()) {
            check.fail("stream " + std::to_string(s) + ": translation changed the fixation count");
            continue;
        }
        for (std::size_t k = 0; k < fix.size(); ++k) {
            check.require(fix2[k].t_start_ms == fix[k].t_start_ms && fix2[k].duration_ms == fix[k].duration_ms,
                          "stream " + std::to_string(s) + ": translation changed fixation timing");
            worst_shift = std::max({worst_shift, std::fabs(fix2[k].x - fix[k].x - dx),
                                    std::fabs(fix2[k].y - fix[k].y - dy)});
        }

        if (s % 10 == 0) {
            std::vector<oracle::Sample> raw;
            for (const auto& g : stream) raw.push_back({g.t_ms, g.x, g.y, g.confidence});
            const auto want = oracle::detect(raw, bound, cfg.dur_min_ms, cfg.dur_max_ms, cfg.min_confidence);
            check.require(want.size() == fix.size(), "stream " + std::to_string(s) + ": oracle disagrees");
        }
    }
    check.require(worst_shift <= 1e-9, "translated positions off by " + fmt(worst_shift));
    check.note("10000 streams, " + std::to_string(total) + " fixations, max position drift " +
               fmt(worst_shift, 3) + " px");
}

void synth_calibration(Check& check) {
    SynthConfig config;
    config.seed = kSeed + 2;
    const TrialGenerator gen(config);
    std::string detail;
    for (TaskLabel task : {TaskLabel::Grasp, TaskLabel::View}) {
        const bool grasp = task == TaskLabel::Grasp;
        double var_sum = 0;
        double count_sum = 0;
        const int n = 5000;
        for (int i = 0; i < n; ++i) {
            Rng rng = derive_rng(config.seed, grasp ? 0 : 1, static_cast<std::uint64_t>(i));
            const Trial t = gen.generate_trial(task, config.train_shapes[i % config.train_shapes.size()], rng);
            var_sum += var_of_distances(t.fixations);
            count_sum += static_cast<double>(t.fixations.size());
        }
        const double var_mean = var_sum / n;
        const double count_mean = count_sum / n;
        const double var_target = grasp ? config.target_var_grasp : config.target_var_view;
        const double count_target = grasp ? config.grasp_count_mean : config.view_count_mean;
        const double rel = std::fabs(var_mean - var_target) / var_target;
        check.require(rel <= 0.10, std::string(to_string(task)) + " VAR mean " + fmt(var_mean) + " vs " +
                                       fmt(var_target));
        check.require(std::fabs(count_mean - count_target) <= 0.05,
                      std::string(to_string(task)) + " count mean " + fmt(count_mean) + " vs " + fmt(count_target));
        detail += std::string(to_string(task)) + ": VAR " + fmt(var_mean) + " (" + fmt(100 * rel, 2) +
                  "% off), count " + fmt(count_mean) + "; ";
    }
    check.note(detail);
}

void classification(Check& check) {
    const SynthDataset& d = dataset();
    check.require(d.train.size() == 640, "training set size " + std::to_string(d.train.size()));
    RepeatedEvalOptions options;
    options.folds = 5;
    options.n_repeats = 100;
    options.seed = kSeed + 3;
    const auto grid = full_grid();
    const auto reports = repeated_eval(d.train, d.test2, grid, options);
    double min1 = 1;
    double min2 = 1;
    for (const CellReport& r : reports) {
        const std::string cell = std::string(to_string(r.cell.combination)) + "/" + std::string(to_string(r.cell.kind));
        check.require(r.test1.mean >= 0.85, cell + " test1 " + fmt(r.test1.mean));
        check.require(r.test2 && r.test2->mean >= 0.85, cell + " test2 " + fmt(r.test2 ? r.test2->mean : 0));
        min1 = std::min(min1, r.test1.mean);
        if (r.test2) min2 = std::min(min2, r.test2->mean);
    }
    check.require(reports.size() == 20, "grid has " + std::to_string(reports.size()) + " cells");
    check.note("20 cells x 100 repeats; worst test1 " + fmt(min1) + ", worst test2 " + fmt(min2));
}

void ablation(Check& check) {
    const SynthDataset& d = dataset();
    std::vector<FeatureVector> features;
    std::vector<TaskLabel> labels;
    for (const Trial& t : d.train) {
        features.push_back(compute_features(t.fixations, t.object));
        labels.push_back(t.task_label);
    }
    LabeledSet centroid_only;
    centroid_only.dim = 1;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double x = features[i].adf2c;
        centroid_only.add(std::span(&x, 1), label_of(labels[i]));
    }
    double best = 0;
    for (ClassifierKind kind : kAllKinds) {
        const double acc = cv_accuracy(
            centroid_only, 10,
            [&](const LabeledSet& s, std::uint64_t seed) {
                Hyperparameters hp;
                hp.seed = seed;
                return train_columns(kind, s, hp);
            },
            kSeed + 4);
        check.require(acc <= 0.65, "ADF2C-only " + std::string(to_string(kind)) + " accuracy " + fmt(acc));
        best = std::max(best, acc);
    }

    const auto p_of = [&](Feature f) { return one_way_f_test(task_groups(d.train, f), 10000, kSeed + 5).p_value; };
    const double p_c = p_of(Feature::Adf2c);
    const double p_i = p_of(Feature::Adf2i);
    const double p_v = p_of(Feature::Var);
    check.require(p_i < 0.001, "ADF2I p = " + fmt(p_i));
    check.require(p_v < 0.001, "VAR p = " + fmt(p_v));
    check.require(p_c > 0.05, "ADF2C p = " + fmt(p_c));
    check.note("best ADF2C-only accuracy " + fmt(best) + "; p(ADF2C) " + fmt(p_c) + ", p(ADF2I) " + fmt(p_i) +
               ", p(VAR) " + fmt(p_v));
}

void ftest_correctness(Check& check) {
    using Groups = std::vector<std::vector<double>>;
    const FTestResult r = one_way_f_test(Groups{{1, 2, 3}, {4, 5, 6}}, 1000, kSeed);
    check.require(r.f_statistic == 13.5, "F = " + fmt(r.f_statistic, 17));
    const FTestResult same = one_way_f_test(Groups{{1, 2, 3}, {1, 2, 3}}, 1000, kSeed);
    check.require(same.f_statistic == 0.0, "identical groups F = " + fmt(same.f_statistic, 17));

    double worst = 0;
    for (Feature f : {Feature::Adf2c, Feature::Adf2i, Feature::Adf2t, Feature::Var}) {
        const auto g = task_groups(dataset().train, f);
        const double p1 = one_way_f_test(g, 10000, kSeed + 6).p_value;
        const double p2 = one_way_f_test(g, 20000, kSeed + 6).p_value;
        worst = std::max(worst, std::fabs(p2 - p1));
        check.require(std::fabs(p2 - p1) < 0.005,
                      std::string(to_string(f)) + " p moved " + fmt(p1) + " -> " + fmt(p2));
    }
    check.note("F = 13.5, identical groups F = 0, max p change on doubling " + fmt(worst, 3));
}

void streaming(Check& check) {
    SynthConfig config;
    config.seed = kSeed;
    const TrialGenerator gen(config);
    auto model = std::make_shared<const TrainedModel>(
        train(ClassifierKind::Knn, Combination::C4, labeled(dataset().train, Combination::C4)));
    const WindowConfig w;
    const double deadline = w.window_ms + static_cast<double>(w.consecutive_required) * w.hop_ms;
    std::mt19937_64 chunk_rng(kSeed + 7);
    int grasp_ok = 0;
    int view_ok = 0;
    const int per_class = 50;
    for (TaskLabel task : {TaskLabel::Grasp, TaskLabel::View}) {
        for (int i = 0; i < per_class; ++i) {
            Rng rng = derive_rng(kSeed + 8, task == TaskLabel::Grasp ? 0 : 1, static_cast<std::uint64_t>(i));
            const auto& shapes = config.train_shapes;
            const Trial rec = gen.generate_recording(task, shapes[static_cast<std::size_t>(i) % shapes.size()],
                                                     6000, rng);
            auto samples = rasterize(rec);
            // Keep one decision horizon: a second fire would need the refractory period plus two windows.
            const double t0 = samples.front().t_ms;
            samples.erase(std::remove_if(samples.begin(), samples.end(),
                                         [&](const GazeSample& s) { return s.t_ms >= t0 + 6000; }),
                          samples.end());

            Session whole(rec.object, model, w);
            const auto events = whole.push_samples(samples);
            std::string reference;
            int fired = 0;
            bool in_time = true;
            for (const auto& e : events) {
                reference += event_line(e) + "\n";
                if (!e.fired) continue;
                ++fired;
                in_time = in_time && e.t_ms - t0 <= deadline && e.label == IntentionLabel::Grasp;
            }
            if (task == TaskLabel::Grasp) {
                check.require(fired == 1 && in_time, "GRASP recording " + std::to_string(i) + " fired " +
                                                         std::to_string(fired) + " times");
                if (fired == 1 && in_time) ++grasp_ok;
            } else {
                check.require(fired == 0, "VIEW recording " + std::to_string(i) + " fired");
                if (fired == 0) ++view_ok;
            }

            Session pieces(rec.object, model, w);
            std::string chunked;
            std::size_t at = 0;
            while (at < samples.size()) {
                const std::size_t n = std::min<std::size_t>(samples.size() - at, 1 + chunk_rng() % 64);
                for (const auto& e : pieces.push_samples(std::span(samples).subspan(at, n))) {
                    chunked += event_line(e) + "\n";
                }
                at += n;
            }
            check.require(chunked == reference, "chunked log differs for recording " + std::to_string(i));
        }
    }
    check.note(std::to_string(grasp_ok) + "/" + std::to_string(per_class) + " GRASP fired once by " +
               fmt(deadline) + " ms, " + std::to_string(view_ok) + "/" + std::to_string(per_class) +
               " VIEW silent, chunked logs identical");
}

void null_model(Check& check) {
    LabeledSet data = labeled(dataset().train, Combination::C5);
    std::mt19937_64 rng(kSeed + 9);
    std::shuffle(data.labels.begin(), data.labels.end(), rng);
    std::string detail;
    for (ClassifierKind kind : kAllKinds) {
        const double acc = cv_accuracy(
            data, 10,
            [&](const LabeledSet& s, std::uint64_t seed) {
                Hyperparameters hp;
                hp.seed = seed;
                return train(kind, Combination::C5, s, hp);
            },
            kSeed + 10);
        check.require(std::fabs(acc - 0.5) <= 0.1, std::string(to_string(kind)) + " accuracy " + fmt(acc));
        detail += std::string(to_string(kind)) + " " + fmt(acc, 3) + " ";
    }
    check.note("shuffled labels: " + detail);
}

}  // namespace

int main() {
    run("feature-oracle-equivalence", 1, feature_oracle);
    run("fixation-detector-properties", 30, detector_properties);
    run("synth-calibration", 30, synth_calibration);
    run("classification-grid", 300, classification);
    run("ablation-significance", 60, ablation);
    run("ftest-correctness", 60, ftest_correctness);
    run("streaming-end-to-end", 30, streaming);
    run("null-model", 60, null_model);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
