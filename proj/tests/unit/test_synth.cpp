#include "gazeintent/error.hpp"
#include "gazeintent/features.hpp"
#include "gazeintent/io.hpp"
#include "gazeintent/synth.hpp"

#include "feature_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace gazeintent;

namespace {

// Variance of |p - center| for p ~ N(center, sigma^2 I), by simulation.
double simulated_distance_variance(double sigma, int draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    double sum = 0;
    double sum_sq = 0;
    for (int i = 0; i < draws; ++i) {
        const double d = std::hypot(n(rng), n(rng));
        sum += d;
        sum_sq += d * d;
    }
    const double mean = sum / draws;
    return sum_sq / draws - mean * mean;
}

std::string dump(const std::vector<Trial>& trials) {
    std::ostringstream out;
    write_dataset(out, trials);
    return out.str();
}

}  // namespace

TEST_CASE("calibrate_sigma follows the Rayleigh relation") {
    CHECK(calibrate_sigma(0) == 0);
    CHECK(calibrate_sigma(29.85) == doctest::Approx(8.3395).epsilon(1e-4));
    CHECK(calibrate_sigma(256.67) == doctest::Approx(24.454).epsilon(1e-4));
    CHECK_THROWS_AS(calibrate_sigma(-1), InvalidInputError);

    for (double target : {29.85, 256.67}) {
        const double var = simulated_distance_variance(calibrate_sigma(target), 1'000'000, 17);
        CHECK(std::abs(var - target) / target < 0.02);
    }
}

TEST_CASE("finite-count factor matches simulation") {
    CHECK(finite_count_factor(1) == 0);
    CHECK(finite_count_factor(2) == 0);
    std::mt19937_64 rng(23);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int count : {3, 8, 15}) {
        const int reps = 200'000;
        double sum = 0;
        std::vector<oracle::Pt> pts(static_cast<std::size_t>(count));
        for (int r = 0; r < reps; ++r) {
            for (auto& p : pts) p = {n(rng), n(rng)};
            sum += static_cast<double>(oracle::var_of_distances(pts));
        }
        const double factor = sum / reps / (2.0 - std::numbers::pi / 2.0);
        CHECK(factor == doctest::Approx(finite_count_factor(count)).epsilon(0.01));
    }
    // Monotone and approaching one.
    for (int k = 3; k < 200; ++k) CHECK(finite_count_factor(k) < finite_count_factor(k + 1));
    CHECK(finite_count_factor(1000) > 0.99);
    CHECK(finite_count_factor(1000) < 1.0);
}

TEST_CASE("rice mean limits and simulation") {
    CHECK(rice_mean(0, 2.0) == doctest::Approx(2.0 * std::sqrt(std::numbers::pi / 2)).epsilon(1e-12));
    CHECK(rice_mean(1000, 1.0) == doctest::Approx(1000.0005).epsilon(1e-9));
    CHECK(rice_mean(7, 0) == 7);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 9.0);
    double sum = 0;
    const int reps = 400'000;
    for (int i = 0; i < reps; ++i) sum += std::hypot(30.0 + n(rng), n(rng));
    CHECK(rice_mean(30, 9) == doctest::Approx(sum / reps).epsilon(0.003));
}

TEST_CASE("count model") {
    const CountModel m{8.18, 0.99};
    double total = 0;
    for (int k = 0; k < 40; ++k) total += m.probability(k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const CountModel fixed{1.2, 0};
    Rng rng(1);
    CHECK(fixed.draw(rng) == 2);
    CHECK(fixed.probability(2) == 1.0);
}

TEST_CASE("shape catalog and contexts") {
    std::set<std::string> train;
    std::set<std::string> held;
    for (const ShapeSpec& s : shape_catalog()) (s.held_out ? held : train).insert(s.id);
    CHECK(train == std::set<std::string>{"square", "cross", "T-up", "T-down", "T-left", "T-right"});
    CHECK(held == std::set<std::string>{"triangle", "bar-h", "bar-v"});
    CHECK_THROWS_AS(find_shape("circle"), InvalidInputError);

    const TrialGenerator gen(SynthConfig{});
    const double r = gen.calibration().grasp_offset_px;
    for (const ShapeSpec& s : shape_catalog()) {
        for (GraspAxis a : s.axes) {
            const ObjectContext c = gen.context_for(s, a, {100, 50});
            CHECK(grasp_axis_of(c) == a);
            CHECK(distance(c.centroid, c.grasp_index) == doctest::Approx(r));
            CHECK(distance(c.centroid, c.grasp_thumb) == doctest::Approx(r));
            CHECK(grasp_axis_from_string(to_string(a)) == a);
        }
    }
}

TEST_CASE("trial generation is deterministic") {
    const TrialGenerator gen(SynthConfig{});
    Rng a(42);
    Rng b(42);
    const Trial x = gen.generate_trial(TaskLabel::Grasp, "square", a);
    const Trial y = gen.generate_trial(TaskLabel::Grasp, "square", b);
    CHECK(x == y);
    CHECK(x.fixations.size() >= 2);
    for (std::size_t i = 1; i < x.fixations.size(); ++i) {
        const Fixation& p = x.fixations[i - 1];
        CHECK(x.fixations[i].t_start_ms >= p.t_start_ms + p.duration_ms + 30);
        CHECK(p.duration_ms >= 80);
        CHECK(p.duration_ms <= 400);
    }
}

TEST_CASE("dataset shape, split and reproducibility") {
    SynthConfig config;
    config.seed = 7;
    const SynthDataset d = generate_dataset(config);
    CHECK(d.train.size() == 640);
    CHECK(d.test2.size() == 60);
    std::size_t grasp = 0;
    std::set<std::string> train_shapes;
    std::set<std::string> test_shapes;
    for (const Trial& t : d.train) {
        grasp += t.task_label == TaskLabel::Grasp;
        train_shapes.insert(t.object.shape_id);
    }
    for (const Trial& t : d.test2) test_shapes.insert(t.object.shape_id);
    CHECK(grasp == 320);
    CHECK(train_shapes.size() == 6);
    CHECK(test_shapes.size() == 3);
    for (const std::string& s : test_shapes) CHECK(train_shapes.count(s) == 0);

    const SynthDataset again = generate_dataset(config);
    CHECK(dump(d.train) == dump(again.train));
    CHECK(dump(d.test2) == dump(again.test2));
    config.seed = 8;
    CHECK(dump(generate_dataset(config).train) != dump(d.train));

    SynthConfig clash;
    clash.test_shapes = {"square"};
    CHECK_THROWS_AS(generate_dataset(clash), InvalidInputError);
}

TEST_CASE("class statistics match the calibration targets") {
    const SynthConfig config;
    const TrialGenerator gen(config);
    double var[2] = {0, 0};
    double count[2] = {0, 0};
    double adf2c[2] = {0, 0};
    double adf2i[2] = {0, 0};
    double adf2t_grasp = 0;
    const int n = 10'000;
    for (int label = 0; label < 2; ++label) {
        const TaskLabel task = label == 0 ? TaskLabel::Grasp : TaskLabel::View;
        for (int i = 0; i < n; ++i) {
            Rng rng = derive_rng(123, static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(i));
            const Trial t = gen.generate_trial(task, config.train_shapes[static_cast<std::size_t>(i) % 6], rng);
            const FeatureVector f = compute_features(t.fixations, t.object);
            var[label] += f.var / n;
            count[label] += static_cast<double>(f.n_fix) / n;
            adf2c[label] += f.adf2c / n;
            adf2i[label] += f.adf2i / n;
            if (label == 0) adf2t_grasp += f.adf2t / n;
        }
    }
    CHECK(std::abs(var[0] / 29.85 - 1) < 0.10);
    CHECK(std::abs(var[1] / 256.67 - 1) < 0.10);
    CHECK(std::abs(count[0] - 8.18) < 0.05);
    CHECK(std::abs(count[1] - 8.62) < 0.05);
    CHECK(adf2i[0] < adf2i[1]);
    CHECK(adf2i[0] < adf2t_grasp);
    CHECK(std::abs(adf2c[0] - adf2c[1]) / adf2c[1] < 0.15);
}

TEST_CASE("rasterized fixations are recovered by the detector") {
    Trial t;
    t.object = {{0, 0}, {-10, 0}, {10, 0}, "square"};
    t.fixations = {{0, 200, 100, 100}, {260, 300, 300, 100}, {610, 150, 300, 350}};
    const auto samples = rasterize(t, 120);
    for (std::size_t i = 1; i < samples.size(); ++i) CHECK(samples[i].t_ms > samples[i - 1].t_ms);
    const auto f = detect_fixations(samples);
    REQUIRE(f.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(f[i].x == doctest::Approx(t.fixations[i].x));
        CHECK(f[i].y == doctest::Approx(t.fixations[i].y));
        CHECK(f[i].t_start_ms >= t.fixations[i].t_start_ms);
        CHECK(f[i].t_start_ms < t.fixations[i].t_start_ms + 1000.0 / 120);
        CHECK(f[i].duration_ms > t.fixations[i].duration_ms - 2000.0 / 120);
    }
    CHECK_THROWS_AS(rasterize(t, 0), InvalidInputError);
}

TEST_CASE("recordings reach the requested length") {
    const TrialGenerator gen(SynthConfig{});
    Rng rng(9);
    const Trial r = gen.generate_recording(TaskLabel::View, "cross", 5000, rng);
    const Fixation& last = r.fixations.back();
    CHECK(last.t_start_ms + last.duration_ms >= 5000);
    for (std::size_t i = 1; i < r.fixations.size(); ++i) {
        CHECK(r.fixations[i].t_start_ms > r.fixations[i - 1].t_start_ms + r.fixations[i - 1].duration_ms);
    }
}
