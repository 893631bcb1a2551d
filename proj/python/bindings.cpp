#include "gazeintent/error.hpp"
#include "gazeintent/features.hpp"
#include "gazeintent/gaze.hpp"
#include "gazeintent/io.hpp"
#include "gazeintent/learn.hpp"
#include "gazeintent/stats.hpp"
#include "gazeintent/stream.hpp"
#include "gazeintent/synth.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace gi = gazeintent;

namespace {

std::vector<gi::FeatureVector> features_of(const std::vector<gi::Trial>& trials) {
    std::vector<gi::FeatureVector> out;
    out.reserve(trials.size());
    for (const gi::Trial& t : trials) out.push_back(gi::compute_features(t.fixations, t.object));
    return out;
}

std::vector<gi::TaskLabel> labels_of(const std::vector<gi::Trial>& trials) {
    std::vector<gi::TaskLabel> out;
    for (const gi::Trial& t : trials) out.push_back(t.task_label);
    return out;
}

}  // namespace

PYBIND11_MODULE(_gazeintent, m) {
    m.doc() = "Gaze-based grasp intention recognition";

    auto base = py::register_exception<gi::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<gi::InvalidInputError>(m, "InvalidInputError", base);
    py::register_exception<gi::InsufficientDataError>(m, "InsufficientDataError", base);
    py::register_exception<gi::SessionError>(m, "SessionError", base);
    py::register_exception<gi::FormatError>(m, "FormatError", base);

    py::class_<gi::Point2>(m, "Point2")
        .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("x", &gi::Point2::x)
        .def_readwrite("y", &gi::Point2::y)
        .def("__repr__", [](const gi::Point2& p) {
            return "Point2(" + gi::format_double(p.x) + ", " + gi::format_double(p.y) + ")";
        });

    py::class_<gi::GazeSample>(m, "GazeSample")
        .def(py::init<double, double, double, double>(), py::arg("t_ms"), py::arg("x"), py::arg("y"),
             py::arg("confidence") = 1.0)
        .def_readwrite("t_ms", &gi::GazeSample::t_ms)
        .def_readwrite("x", &gi::GazeSample::x)
        .def_readwrite("y", &gi::GazeSample::y)
        .def_readwrite("confidence", &gi::GazeSample::confidence);

    py::class_<gi::Fixation>(m, "Fixation")
        .def(py::init<double, double, double, double>(), py::arg("t_start_ms"), py::arg("duration_ms"),
             py::arg("x"), py::arg("y"))
        .def_readwrite("t_start_ms", &gi::Fixation::t_start_ms)
        .def_readwrite("duration_ms", &gi::Fixation::duration_ms)
        .def_readwrite("x", &gi::Fixation::x)
        .def_readwrite("y", &gi::Fixation::y)
        .def("__eq__", [](const gi::Fixation& a, const gi::Fixation& b) { return a == b; })
        .def("__repr__", [](const gi::Fixation& f) {
            return "Fixation(t_start_ms=" + gi::format_double(f.t_start_ms) +
                   ", duration_ms=" + gi::format_double(f.duration_ms) + ", x=" + gi::format_double(f.x) +
                   ", y=" + gi::format_double(f.y) + ")";
        });

    py::class_<gi::FixationDetectorConfig>(m, "FixationDetectorConfig")
        .def(py::init<>())
        .def_readwrite("dispersion_max_deg", &gi::FixationDetectorConfig::dispersion_max_deg)
        .def_readwrite("px_per_deg", &gi::FixationDetectorConfig::px_per_deg)
        .def_readwrite("dur_min_ms", &gi::FixationDetectorConfig::dur_min_ms)
        .def_readwrite("dur_max_ms", &gi::FixationDetectorConfig::dur_max_ms)
        .def_readwrite("min_confidence", &gi::FixationDetectorConfig::min_confidence);

    py::enum_<gi::TaskLabel>(m, "TaskLabel")
        .value("GRASP", gi::TaskLabel::Grasp)
        .value("VIEW", gi::TaskLabel::View)
        .value("UNLABELED", gi::TaskLabel::Unlabeled);

    py::class_<gi::ObjectContext>(m, "ObjectContext")
        .def(py::init([](gi::Point2 centroid, gi::Point2 thumb, gi::Point2 index, std::string shape_id) {
                 gi::ObjectContext c{centroid, thumb, index, std::move(shape_id)};
                 c.validate();
                 return c;
             }),
             py::arg("centroid"), py::arg("grasp_thumb"), py::arg("grasp_index"), py::arg("shape_id") = "")
        .def_readwrite("centroid", &gi::ObjectContext::centroid)
        .def_readwrite("grasp_thumb", &gi::ObjectContext::grasp_thumb)
        .def_readwrite("grasp_index", &gi::ObjectContext::grasp_index)
        .def_readwrite("shape_id", &gi::ObjectContext::shape_id);

    py::class_<gi::Trial>(m, "Trial")
        .def(py::init<>())
        .def_readwrite("trial_id", &gi::Trial::trial_id)
        .def_readwrite("participant_id", &gi::Trial::participant_id)
        .def_readwrite("task_label", &gi::Trial::task_label)
        .def_readwrite("fixations", &gi::Trial::fixations)
        .def_readwrite("object", &gi::Trial::object)
        .def("to_json", [](const gi::Trial& t) { return gi::to_json(t).dump(); })
        .def_static("from_json", [](const std::string& text) { return gi::trial_from_json(gi::Json::parse(text)); });

    py::class_<gi::FeatureVector>(m, "FeatureVector")
        .def(py::init<>())
        .def_readwrite("adf2c", &gi::FeatureVector::adf2c)
        .def_readwrite("adf2t", &gi::FeatureVector::adf2t)
        .def_readwrite("adf2i", &gi::FeatureVector::adf2i)
        .def_readwrite("var", &gi::FeatureVector::var)
        .def_readwrite("n_fix", &gi::FeatureVector::n_fix);

    py::enum_<gi::Combination>(m, "Combination")
        .value("C1", gi::Combination::C1)
        .value("C2", gi::Combination::C2)
        .value("C3", gi::Combination::C3)
        .value("C4", gi::Combination::C4)
        .value("C5", gi::Combination::C5);

    py::enum_<gi::ClassifierKind>(m, "ClassifierKind")
        .value("KNN", gi::ClassifierKind::Knn)
        .value("SVM_LINEAR", gi::ClassifierKind::SvmLinear)
        .value("SGD_LOGISTIC", gi::ClassifierKind::SgdLogistic)
        .value("DECISION_TREE", gi::ClassifierKind::DecisionTree);

    m.def("detect_fixations",
          [](const std::vector<gi::GazeSample>& samples, const gi::FixationDetectorConfig& config) {
              return gi::detect_fixations(samples, config);
          },
          py::arg("samples"), py::arg("config") = gi::FixationDetectorConfig{});
    m.def("compute_features",
          [](const std::vector<gi::Fixation>& fixations, const gi::ObjectContext& context) {
              return gi::compute_features(fixations, context);
          },
          py::arg("fixations"), py::arg("context"));
    m.def("extract", &gi::extract, py::arg("trial"), py::arg("combination"));

    py::class_<gi::SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("n_per_class", &gi::SynthConfig::n_per_class)
        .def_readwrite("n_test_per_class", &gi::SynthConfig::n_test_per_class)
        .def_readwrite("seed", &gi::SynthConfig::seed)
        .def_readwrite("target_var_grasp", &gi::SynthConfig::target_var_grasp)
        .def_readwrite("target_var_view", &gi::SynthConfig::target_var_view);

    m.def("generate_dataset",
          [](const gi::SynthConfig& config) {
              gi::SynthDataset d = gi::generate_dataset(config);
              return py::make_tuple(std::move(d.train), std::move(d.test2));
          },
          py::arg("config"), "Returns (train, test2) trial lists.");
    m.def("rasterize", &gi::rasterize, py::arg("trial"), py::arg("rate_hz") = 120.0);

    py::class_<gi::TrainedModel, std::shared_ptr<gi::TrainedModel>>(m, "TrainedModel")
        .def_readonly("kind", &gi::TrainedModel::kind)
        .def_readonly("combination", &gi::TrainedModel::combination)
        .def("predict",
             [](const gi::TrainedModel& model, const gi::FeatureVector& f) {
                 return gi::task_of(gi::predict(model, gi::project(f, model.combination)));
             })
        .def("to_json", [](const gi::TrainedModel& model) { return gi::model_to_json(model).dump(); })
        .def_static("from_json", [](const std::string& text) {
            return std::make_shared<gi::TrainedModel>(gi::model_from_json(gi::Json::parse(text)));
        });

    m.def("train",
          [](gi::ClassifierKind kind, gi::Combination combination, const std::vector<gi::Trial>& trials,
             std::uint64_t seed, int knn_k) {
              gi::Hyperparameters hp;
              hp.seed = seed;
              hp.knn_k = knn_k;
              const auto data = gi::make_labeled(features_of(trials), labels_of(trials), combination);
              return std::make_shared<gi::TrainedModel>(gi::train(kind, combination, data, hp));
          },
          py::arg("kind"), py::arg("combination"), py::arg("trials"), py::arg("seed") = 0, py::arg("knn_k") = 5);

    m.def("evaluate",
          [](const std::vector<gi::Trial>& train, const std::vector<gi::Trial>& test2, gi::Combination combination,
             gi::ClassifierKind kind, std::size_t repeats, std::size_t folds, std::uint64_t seed) {
              gi::RepeatedEvalOptions options;
              options.n_repeats = repeats;
              options.folds = folds;
              options.seed = seed;
              options.threads = 1;
              const gi::GridCell cell{combination, kind};
              const auto reports = gi::repeated_eval(train, test2, {&cell, 1}, options);
              py::dict out;
              out["test1_mean"] = reports[0].test1.mean;
              out["test1_std"] = reports[0].test1.std;
              if (reports[0].test2) {
                  out["test2_mean"] = reports[0].test2->mean;
                  out["test2_std"] = reports[0].test2->std;
              }
              return out;
          },
          py::arg("train"), py::arg("test2"), py::arg("combination"), py::arg("kind"), py::arg("repeats") = 10,
          py::arg("folds") = 5, py::arg("seed") = 0);

    py::class_<gi::FTestResult>(m, "FTestResult")
        .def_readonly("f_statistic", &gi::FTestResult::f_statistic)
        .def_readonly("p_value", &gi::FTestResult::p_value)
        .def_readonly("df_between", &gi::FTestResult::df_between)
        .def_readonly("df_within", &gi::FTestResult::df_within)
        .def_readonly("n_permutations", &gi::FTestResult::n_permutations);

    m.def("one_way_f_test",
          [](const std::vector<std::vector<double>>& groups, std::size_t n_permutations, std::uint64_t seed) {
              return gi::one_way_f_test(groups, n_permutations, seed);
          },
          py::arg("groups"), py::arg("n_permutations") = 10000, py::arg("seed") = 0);

    py::enum_<gi::IntentionLabel>(m, "IntentionLabel")
        .value("GRASP", gi::IntentionLabel::Grasp)
        .value("VIEW", gi::IntentionLabel::View)
        .value("INSUFFICIENT", gi::IntentionLabel::Insufficient);

    py::class_<gi::IntentionEvent>(m, "IntentionEvent")
        .def_readonly("t_ms", &gi::IntentionEvent::t_ms)
        .def_readonly("label", &gi::IntentionEvent::label)
        .def_readonly("window_features", &gi::IntentionEvent::window_features)
        .def_readonly("fired", &gi::IntentionEvent::fired);

    py::class_<gi::WindowConfig>(m, "WindowConfig")
        .def(py::init<>())
        .def_readwrite("window_ms", &gi::WindowConfig::window_ms)
        .def_readwrite("hop_ms", &gi::WindowConfig::hop_ms)
        .def_readwrite("min_fixations", &gi::WindowConfig::min_fixations)
        .def_readwrite("consecutive_required", &gi::WindowConfig::consecutive_required)
        .def_readwrite("refractory_ms", &gi::WindowConfig::refractory_ms);

    py::class_<gi::Session>(m, "Session")
        .def(py::init([](const gi::ObjectContext& context, std::shared_ptr<gi::TrainedModel> model,
                         const gi::WindowConfig& window) {
                 return gi::Session(context, std::move(model), window);
             }),
             py::arg("context"), py::arg("model"), py::arg("window") = gi::WindowConfig{})
        .def("push_sample", &gi::Session::push_sample, py::arg("sample"))
        .def("push_samples",
             [](gi::Session& s, const std::vector<gi::GazeSample>& samples) { return s.push_samples(samples); },
             py::arg("samples"));
}
