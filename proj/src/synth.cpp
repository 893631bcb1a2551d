#include "gazeintent/synth.hpp"

#include "gazeintent/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace gazeintent {

namespace {

constexpr double kRayleighVarFactor = 2.0 - std::numbers::pi / 2.0;

// E[VAR_n] / ((2 - pi/2) sigma^2) for n = 3..40, Monte-Carlo estimates with
// 4e6 draws each (standard error <= 2.3e-4). n = 2 is exactly 0.
constexpr std::array<double, 38> kFiniteCountFactor = {
    0.34122, 0.50458, 0.60292, 0.66897, 0.71602, 0.75153, 0.77896, 0.80113,  // 3..10
    0.81878, 0.83388, 0.84669, 0.85732, 0.86708, 0.87556, 0.88298, 0.88907,  // 11..18
    0.89518, 0.90036, 0.90491, 0.90904, 0.91303, 0.91644, 0.92000, 0.92335,  // 19..26
    0.92617, 0.92856, 0.93129, 0.93351, 0.93533, 0.93745,
    0.93957, 0.94139, 0.94275, 0.94446, 0.94617, 0.94752, 0.94894, 0.95005};

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Point2 unit(GraspAxis axis) {
    // Index finger on the right edge for horizontal grasps, on the top edge
    // (smaller y) for vertical ones.
    return axis == GraspAxis::Horizontal ? Point2{1.0, 0.0} : Point2{0.0, -1.0};
}

std::vector<Point2> rotate_quarter(std::vector<Point2> pts, int quarters) {
    for (int q = 0; q < quarters; ++q) {
        for (Point2& p : pts) p = {-p.y, p.x};
    }
    return pts;
}

std::vector<ShapeSpec> build_catalog() {
    using A = GraspAxis;
    constexpr double a = 1.0 / 3.0;
    const std::vector<Point2> t_up = {{-1, -1}, {1, -1}, {1, -a}, {a, -a}, {a, 1},
                                      {-a, 1},  {-a, -a}, {-1, -a}};
    return {
        {"square", {A::Horizontal, A::Vertical}, false, {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}},
        {"cross",
         {A::Horizontal, A::Vertical},
         false,
         {{-a, -1}, {a, -1}, {a, -a}, {1, -a}, {1, a}, {a, a}, {a, 1}, {-a, 1}, {-a, a}, {-1, a},
          {-1, -a}, {-a, -a}}},
        {"T-up", {A::Vertical}, false, t_up},
        {"T-down", {A::Vertical}, false, rotate_quarter(t_up, 2)},
        {"T-left", {A::Horizontal}, false, rotate_quarter(t_up, 3)},
        {"T-right", {A::Horizontal}, false, rotate_quarter(t_up, 1)},
        {"triangle", {A::Vertical}, true, {{0, -1}, {1.2, 1}, {-1.2, 1}}},
        {"bar-h", {A::Vertical}, true, {{-2.5, -1}, {2.5, -1}, {2.5, 1}, {-2.5, 1}}},
        {"bar-v", {A::Horizontal}, true, {{-1, -2.5}, {1, -2.5}, {1, 2.5}, {-1, 2.5}}},
    };
}

// Solves rice_mean(nu, sigma) = target for nu >= 0 by bisection.
double solve_offset(double sigma, double target) {
    if (target <= rice_mean(0.0, sigma)) return 0.0;
    double lo = 0.0;
    double hi = target + sigma;
    while (rice_mean(hi, sigma) < target) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (rice_mean(mid, sigma) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::string pad(std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

Rng derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(index), hi(index)};
    return Rng(seq);
}

std::string_view to_string(GraspAxis axis) {
    return axis == GraspAxis::Horizontal ? "horizontal" : "vertical";
}

GraspAxis grasp_axis_from_string(std::string_view text) {
    if (text == "horizontal") return GraspAxis::Horizontal;
    if (text == "vertical") return GraspAxis::Vertical;
    throw InvalidInputError("unknown grasp axis '" + std::string(text) + "'");
}

GraspAxis grasp_axis_of(const ObjectContext& context) {
    const double dx = std::abs(context.grasp_index.x - context.grasp_thumb.x);
    const double dy = std::abs(context.grasp_index.y - context.grasp_thumb.y);
    return dx >= dy ? GraspAxis::Horizontal : GraspAxis::Vertical;
}

const std::vector<ShapeSpec>& shape_catalog() {
    static const std::vector<ShapeSpec> catalog = build_catalog();
    return catalog;
}

const ShapeSpec& find_shape(std::string_view id) {
    for (const ShapeSpec& s : shape_catalog()) {
        if (s.id == id) return s;
    }
    throw InvalidInputError("unknown shape '" + std::string(id) + "'");
}

void SynthConfig::validate() const {
    if (n_per_class < 1) throw InvalidInputError("synth: n_per_class must be at least 1");
    if (grasp_count_std < 0.0 || view_count_std < 0.0) {
        throw InvalidInputError("synth: count standard deviations must be >= 0");
    }
    if (!(target_var_grasp >= 0.0) || !(target_var_view >= 0.0)) {
        throw InvalidInputError("synth: target variances must be >= 0");
    }
    if (!(fixation_dur_min_ms > 0.0) || fixation_dur_max_ms < fixation_dur_min_ms ||
        saccade_gap_min_ms < 0.0 || saccade_gap_max_ms < saccade_gap_min_ms) {
        throw InvalidInputError("synth: invalid duration or gap range");
    }
    if (placement_jitter_px < 0.0) throw InvalidInputError("synth: placement jitter must be >= 0");
    if (train_shapes.empty()) throw InvalidInputError("synth: no training shapes");
    std::set<std::string> seen;
    for (const std::string& s : train_shapes) {
        find_shape(s);
        seen.insert(s);
    }
    for (const std::string& s : test_shapes) {
        find_shape(s);
        if (seen.count(s) != 0) {
            throw InvalidInputError("synth: shape '" + s + "' is both a training and a test shape");
        }
    }
}

double calibrate_sigma(double target_var) {
    if (!(target_var >= 0.0)) throw InvalidInputError("calibrate_sigma: target variance must be >= 0");
    return std::sqrt(target_var / kRayleighVarFactor);
}

double finite_count_factor(int n) {
    if (n <= 2) return 0.0;
    const auto last = static_cast<int>(kFiniteCountFactor.size()) + 2;
    if (n <= last) return kFiniteCountFactor[static_cast<std::size_t>(n - 3)];
    // Beyond the table the factor follows 1 - b/n; b is matched at the last entry.
    const double b = (1.0 - kFiniteCountFactor.back()) * last;
    return 1.0 - b / n;
}

int CountModel::draw(Rng& rng) const {
    double x = mean;
    if (std > 0.0) x = std::normal_distribution<double>(mean, std)(rng);
    return static_cast<int>(std::max(2L, std::lround(x)));
}

double CountModel::probability(int n) const {
    if (n < 2) return 0.0;
    if (!(std > 0.0)) return std::max(2L, std::lround(mean)) == n ? 1.0 : 0.0;
    const double upper = standard_normal_cdf((n + 0.5 - mean) / std);
    if (n == 2) return upper;
    return upper - standard_normal_cdf((n - 0.5 - mean) / std);
}

namespace {

template <class F>
double expect_over_counts(const CountModel& model, F f) {
    const int top = static_cast<int>(std::ceil(model.mean + 12.0 * model.std)) + 2;
    double total = 0.0;
    for (int n = 2; n <= top; ++n) total += model.probability(n) * f(n);
    return total;
}

}  // namespace

double CountModel::expectation_of_inverse() const {
    return expect_over_counts(*this, [](int n) { return 1.0 / n; });
}

double CountModel::expected_finite_count_factor() const {
    return expect_over_counts(*this, [](int n) { return finite_count_factor(n); });
}

double rice_mean(double nu, double sigma) {
    nu = std::abs(nu);
    if (!(sigma > 0.0)) return nu;
    const double q = nu * nu / (2.0 * sigma * sigma);
    if (q > 500.0) return std::sqrt(nu * nu + sigma * sigma);
    const double h = 0.5 * q;
    return sigma * std::sqrt(std::numbers::pi / 2.0) * std::exp(-h) *
           ((1.0 + q) * std::cyl_bessel_i(0.0, h) + q * std::cyl_bessel_i(1.0, h));
}

Calibration calibrate(const SynthConfig& config) {
    const CountModel grasp{config.grasp_count_mean, config.grasp_count_std};
    const CountModel view{config.view_count_mean, config.view_count_std};

    Calibration c;
    const double grasp_factor = grasp.expected_finite_count_factor();
    const double view_factor = view.expected_finite_count_factor();
    if (!(grasp_factor > 0.0) || !(view_factor > 0.0)) {
        throw InvalidInputError("synth: fixation counts must allow at least 3 fixations");
    }
    c.sigma_grasp = calibrate_sigma(config.target_var_grasp) / std::sqrt(grasp_factor);
    c.sigma_view = calibrate_sigma(config.target_var_view) / std::sqrt(view_factor);

    // Place the index grasp point so the expected ADF2C matches across tasks,
    // then spread the per-trial GRASP anchor until per-trial ADF2C variances
    // match as well. Both conditions are coupled; a short fixed-point
    // iteration settles them.
    const double view_adf2c = c.sigma_view * std::sqrt(std::numbers::pi / 2.0);
    const double view_adf2c_var =
        kRayleighVarFactor * c.sigma_view * c.sigma_view * view.expectation_of_inverse();
    double jitter = 0.0;
    double offset = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        offset = solve_offset(std::hypot(c.sigma_grasp, jitter), view_adf2c);
        const double m = rice_mean(offset, c.sigma_grasp);
        const double within = std::max(0.0, 2.0 * c.sigma_grasp * c.sigma_grasp + offset * offset - m * m) *
                              grasp.expectation_of_inverse();
        const double next = std::sqrt(std::max(0.0, view_adf2c_var - within));
        if (std::abs(next - jitter) < 1e-12) {
            jitter = next;
            break;
        }
        jitter = next;
    }
    c.grasp_offset_px = solve_offset(std::hypot(c.sigma_grasp, jitter), view_adf2c);
    c.anchor_jitter_px = jitter;
    return c;
}

TrialGenerator::TrialGenerator(SynthConfig config)
    : config_(std::move(config)),
      grasp_counts_{config_.grasp_count_mean, config_.grasp_count_std},
      view_counts_{config_.view_count_mean, config_.view_count_std} {
    config_.validate();
    calibration_ = calibrate(config_);
}

ObjectContext TrialGenerator::context_for(const ShapeSpec& shape, GraspAxis axis, Point2 center) const {
    const Point2 u = unit(axis);
    const double r = calibration_.grasp_offset_px;
    ObjectContext ctx;
    ctx.centroid = center;
    ctx.grasp_index = {center.x + r * u.x, center.y + r * u.y};
    ctx.grasp_thumb = {center.x - r * u.x, center.y - r * u.y};
    ctx.shape_id = shape.id;
    return ctx;
}

std::vector<Fixation> TrialGenerator::generate_fixations(TaskLabel task, const ObjectContext& context,
                                                         double t_offset_ms, Rng& rng) const {
    if (task == TaskLabel::Unlabeled) throw InvalidInputError("generate_fixations: task must be labeled");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> duration(config_.fixation_dur_min_ms,
                                                    config_.fixation_dur_max_ms);
    std::uniform_real_distribution<double> gap(config_.saccade_gap_min_ms, config_.saccade_gap_max_ms);

    const bool grasp = task == TaskLabel::Grasp;
    const int n = (grasp ? grasp_counts_ : view_counts_).draw(rng);
    Point2 center = grasp ? context.grasp_index : context.centroid;
    if (grasp) {
        const double jx = normal(rng);
        const double jy = normal(rng);
        center.x += calibration_.anchor_jitter_px * jx;
        center.y += calibration_.anchor_jitter_px * jy;
    }
    const double sigma = grasp ? calibration_.sigma_grasp : calibration_.sigma_view;

    std::vector<Fixation> out;
    out.reserve(static_cast<std::size_t>(n));
    double t = t_offset_ms;
    for (int i = 0; i < n; ++i) {
        const double dur = duration(rng);
        const double dx = normal(rng);
        const double dy = normal(rng);
        out.push_back({t, dur, center.x + sigma * dx, center.y + sigma * dy});
        t += dur + gap(rng);
    }
    return out;
}

Trial TrialGenerator::generate_trial(TaskLabel task, std::string_view shape_id, Rng& rng) const {
    const ShapeSpec& shape = find_shape(shape_id);
    std::uniform_int_distribution<std::size_t> pick_axis(0, shape.axes.size() - 1);
    const GraspAxis axis = shape.axes[pick_axis(rng)];
    std::uniform_real_distribution<double> jitter(-config_.placement_jitter_px,
                                                  config_.placement_jitter_px);
    const double jx = jitter(rng);
    const double jy = jitter(rng);
    const Point2 center{config_.scene_center.x + jx, config_.scene_center.y + jy};

    Trial trial;
    trial.participant_id = "synthetic";
    trial.task_label = task;
    trial.object = context_for(shape, axis, center);
    trial.fixations = generate_fixations(task, trial.object, 0.0, rng);
    return trial;
}

Trial TrialGenerator::generate_recording(TaskLabel task, std::string_view shape_id,
                                         double min_duration_ms, Rng& rng) const {
    Trial trial = generate_trial(task, shape_id, rng);
    trial.trial_id = "recording";
    std::uniform_real_distribution<double> gap(config_.saccade_gap_min_ms, config_.saccade_gap_max_ms);
    auto end_of = [](const Fixation& f) { return f.t_start_ms + f.duration_ms; };
    while (end_of(trial.fixations.back()) < min_duration_ms) {
        const double next_start = end_of(trial.fixations.back()) + gap(rng);
        auto more = generate_fixations(task, trial.object, next_start, rng);
        trial.fixations.insert(trial.fixations.end(), more.begin(), more.end());
    }
    return trial;
}

SynthDataset generate_dataset(const SynthConfig& config) {
    const TrialGenerator generator(config);
    SynthDataset dataset;

    struct Split {
        const std::vector<std::string>* shapes;
        std::size_t per_class;
        std::vector<Trial>* out;
        const char* prefix;
    };
    const std::array<Split, 2> splits = {
        Split{&config.train_shapes, config.n_per_class, &dataset.train, "train"},
        Split{&config.test_shapes, config.n_test_per_class, &dataset.test2, "test2"}};

    for (std::size_t s = 0; s < splits.size(); ++s) {
        const Split& split = splits[s];
        if (split.shapes->empty()) continue;
        for (TaskLabel task : {TaskLabel::Grasp, TaskLabel::View}) {
            const std::uint64_t stream = 2 * s + (task == TaskLabel::Grasp ? 0 : 1);
            for (std::size_t i = 0; i < split.per_class; ++i) {
                Rng rng = derive_rng(config.seed, stream, i);
                const std::string& shape = (*split.shapes)[i % split.shapes->size()];
                Trial trial = generator.generate_trial(task, shape, rng);
                trial.trial_id = std::string(split.prefix) + (task == TaskLabel::Grasp ? "-g-" : "-v-") +
                                 pad(i);
                trial.participant_id = "P" + std::to_string(i % 8 + 1);
                split.out->push_back(std::move(trial));
            }
        }
    }
    return dataset;
}

std::vector<GazeSample> rasterize(const Trial& trial, double rate_hz) {
    if (!(rate_hz > 0.0)) throw InvalidInputError("rasterize: rate must be positive");
    std::vector<GazeSample> out;
    const double period = 1000.0 / rate_hz;
    for (const Fixation& f : trial.fixations) {
        const double end = f.t_start_ms + f.duration_ms;
        // Sample clock ticks k * period; a tick already emitted is never repeated.
        auto k = static_cast<long long>(std::ceil(f.t_start_ms / period));
        for (double t = static_cast<double>(k) * period; t <= end; t = static_cast<double>(++k) * period) {
            if (!out.empty() && t <= out.back().t_ms) continue;
            out.push_back({t, f.x, f.y, 1.0});
        }
    }
    return out;
}

}  // namespace gazeintent
