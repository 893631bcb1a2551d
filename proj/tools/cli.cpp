#include "cli.hpp"

#include "gazeintent/error.hpp"
#include "gazeintent/io.hpp"
#include "gazeintent/server.hpp"
#include "gazeintent/service.hpp"
#include "gazeintent/stats.hpp"
#include "gazeintent/synth.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace gazeintent::cli {

namespace fs = std::filesystem;

namespace {

struct Paths {
    std::string input;
    std::string output;
};

std::ifstream open_input(const std::string& path) {
    if (!fs::is_regular_file(path)) throw Error("input file '" + path + "' does not exist");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    return in;
}

std::vector<Trial> load_dataset(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_dataset(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

Json load_json(const std::string& path) {
    auto in = open_input(path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

TrainedModel load_model(const std::string& path) {
    try {
        return model_from_json(load_json(path));
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

std::vector<GazeSample> load_gaze(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_gaze_csv(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void add_detector_options(CLI::App* sub, FixationDetectorConfig& config) {
    sub->add_option("--dispersion-deg", config.dispersion_max_deg, "Dispersion threshold in degrees")
        ->capture_default_str();
    sub->add_option("--px-per-deg", config.px_per_deg, "Scene pixels per degree")->capture_default_str();
    sub->add_option("--dur-min", config.dur_min_ms, "Minimum fixation duration (ms)")->capture_default_str();
    sub->add_option("--dur-max", config.dur_max_ms, "Maximum fixation duration (ms)")->capture_default_str();
    sub->add_option("--min-confidence", config.min_confidence, "Samples below this are ignored")
        ->capture_default_str();
}

void add_window_options(CLI::App* sub, WindowConfig& window) {
    sub->add_option("--window-ms", window.window_ms, "Window length (ms)")->capture_default_str();
    sub->add_option("--hop-ms", window.hop_ms, "Window hop (ms)")->capture_default_str();
    sub->add_option("--min-fixations", window.min_fixations, "Fixations needed to classify a window")
        ->capture_default_str();
    sub->add_option("--consecutive", window.consecutive_required, "GRASP windows in a row before firing")
        ->capture_default_str();
    sub->add_option("--refractory-ms", window.refractory_ms, "Pause after a fired event (ms)")
        ->capture_default_str();
}

std::vector<Combination> parse_combinations(const std::string& text) {
    if (text == "all") return {kAllCombinations.begin(), kAllCombinations.end()};
    return {combination_from_string(text)};
}

std::vector<ClassifierKind> parse_kinds(const std::string& text) {
    if (text == "all") return {kAllKinds.begin(), kAllKinds.end()};
    return {kind_from_string(text)};
}

bool needs_seed(ClassifierKind kind) {
    return kind == ClassifierKind::SvmLinear || kind == ClassifierKind::SgdLogistic;
}

std::shared_ptr<const TrainedModel> default_model(std::uint64_t seed) {
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
        train(ClassifierKind::Knn, Combination::C4, make_labeled(features, labels, Combination::C4), hp));
}

int serve(const std::string& host, std::uint16_t port, unsigned threads, std::shared_ptr<const ModelStore> store,
          std::ostream& out) {
    // Signals are taken synchronously by this thread; server threads inherit the mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    Server server({host, port, threads}, std::move(store));
    server.start();
    out << "listening on " << host << ':' << server.port() << std::endl;
    int received = 0;
    sigwait(&signals, &received);
    server.stop();
    out << "stopped" << std::endl;
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaze-based grasp intention recognition toolkit", "gazeintent"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gazeintent 0.1.0");

    std::function<int()> action;

    // detect
    Paths detect_paths;
    FixationDetectorConfig detector;
    auto* detect = app.add_subcommand("detect", "Gaze stream CSV -> fixation CSV");
    detect->add_option("-i,--input", detect_paths.input, "Gaze stream CSV")->required();
    detect->add_option("-o,--output", detect_paths.output, "Fixation CSV")->required();
    add_detector_options(detect, detector);
    detect->callback([&] {
        action = [&] {
            detector.validate();
            const auto samples = load_gaze(detect_paths.input);
            const auto fixations = detect_fixations(samples, detector);
            write_file_atomic(detect_paths.output, [&](std::ostream& o) { write_fixations_csv(o, fixations); });
            return 0;
        };
    });

    // extract
    Paths extract_paths;
    auto* extract_cmd = app.add_subcommand("extract", "Trial dataset -> feature dump CSV");
    extract_cmd->add_option("-i,--input", extract_paths.input, "Dataset (one trial per line)")->required();
    extract_cmd->add_option("-o,--output", extract_paths.output, "Feature dump CSV")->required();
    extract_cmd->callback([&] {
        action = [&] {
            const auto trials = load_dataset(extract_paths.input);
            std::vector<FeatureRecord> records;
            for (const Trial& t : trials) {
                try {
                    records.push_back(feature_record(t));
                } catch (const InsufficientDataError& e) {
                    throw InsufficientDataError("trial '" + t.trial_id + "': " + e.what());
                }
            }
            write_file_atomic(extract_paths.output, [&](std::ostream& o) { write_feature_dump(o, records); });
            return 0;
        };
    });

    // synth
    SynthConfig synth_config;
    std::string synth_dir;
    auto* synth = app.add_subcommand("synth", "Generate a calibrated synthetic dataset");
    synth->add_option("--seed", synth_config.seed, "Random seed")->required();
    synth->add_option("--n", synth_config.n_per_class, "Training trials per class")->capture_default_str();
    synth->add_option("--n-test", synth_config.n_test_per_class, "Held-out-shape trials per class")
        ->capture_default_str();
    synth->add_option("-o,--output", synth_dir, "Output directory")->required();
    synth->callback([&] {
        action = [&] {
            synth_config.validate();
            const SynthDataset data = generate_dataset(synth_config);
            fs::create_directories(synth_dir);
            const fs::path dir(synth_dir);
            write_file_atomic(dir / "train.jsonl", [&](std::ostream& o) { write_dataset(o, data.train); });
            write_file_atomic(dir / "test2.jsonl", [&](std::ostream& o) { write_dataset(o, data.test2); });
            const Calibration c = TrialGenerator(synth_config).calibration();
            Json manifest{{"config", to_json(synth_config)},
                          {"calibration",
                           {{"sigma_grasp", c.sigma_grasp},
                            {"sigma_view", c.sigma_view},
                            {"grasp_offset_px", c.grasp_offset_px},
                            {"anchor_jitter_px", c.anchor_jitter_px}}},
                          {"files", {{"train", "train.jsonl"}, {"test2", "test2.jsonl"}}}};
            write_file_atomic(dir / "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
            return 0;
        };
    });

    // train
    Paths train_paths;
    std::string train_kind = "knn";
    std::string train_combination = "c4";
    Hyperparameters train_hp;
    std::optional<std::uint64_t> train_seed;
    auto* train_cmd = app.add_subcommand("train", "Fit a classifier on a dataset");
    train_cmd->add_option("-i,--input", train_paths.input, "Training dataset")->required();
    train_cmd->add_option("-o,--output", train_paths.output, "Model JSON")->required();
    train_cmd->add_option("--kind", train_kind, "knn, svm, sgd or dtree")->capture_default_str();
    train_cmd->add_option("--combination", train_combination, "c1..c5")->capture_default_str();
    train_cmd->add_option("--k", train_hp.knn_k, "KNN neighbours")->capture_default_str();
    train_cmd->add_option("--seed", train_seed, "Random seed (required for svm and sgd)");
    train_cmd->callback([&] {
        action = [&] {
            const ClassifierKind kind = kind_from_string(train_kind);
            const Combination combination = combination_from_string(train_combination);
            if (needs_seed(kind) && !train_seed) {
                throw InvalidInputError("--seed is required for kind '" + train_kind + "'");
            }
            train_hp.seed = train_seed.value_or(0);
            const auto trials = load_dataset(train_paths.input);
            std::vector<FeatureVector> features;
            std::vector<TaskLabel> labels;
            for (const Trial& t : trials) {
                features.push_back(compute_features(t.fixations, t.object));
                labels.push_back(t.task_label);
            }
            const TrainedModel model = train(kind, combination, make_labeled(features, labels, combination), train_hp);
            write_file_atomic(train_paths.output, [&](std::ostream& o) { o << model_to_json(model).dump() << '\n'; });
            return 0;
        };
    });

    // eval
    Paths eval_paths;
    std::string eval_test2;
    std::string eval_grid;
    std::string eval_kind = "all";
    std::string eval_combination = "all";
    RepeatedEvalOptions eval_options;
    auto* eval = app.add_subcommand("eval", "Repeated k-fold evaluation report");
    eval->add_option("-i,--input", eval_paths.input, "Training dataset")->required();
    eval->add_option("--test2", eval_test2, "Held-out-shape dataset");
    eval->add_option("-o,--output", eval_paths.output, "Report CSV")->required();
    eval->add_option("--grid", eval_grid, "'all' for every combination and kind")->check(CLI::IsMember({"all"}));
    eval->add_option("--kind", eval_kind, "knn, svm, sgd, dtree or all")->capture_default_str();
    eval->add_option("--combination", eval_combination, "c1..c5 or all")->capture_default_str();
    eval->add_option("--repeats", eval_options.n_repeats, "Cross-validation repeats")->capture_default_str();
    eval->add_option("--folds", eval_options.folds, "Cross-validation folds")->capture_default_str();
    eval->add_option("--k", eval_options.hp.knn_k, "KNN neighbours")->capture_default_str();
    eval->add_option("--threads", eval_options.threads, "Worker threads (0: all cores)")->capture_default_str();
    eval->add_option("--seed", eval_options.seed, "Random seed")->required();
    eval->callback([&] {
        action = [&] {
            if (!eval_grid.empty()) eval_kind = eval_combination = "all";
            std::vector<GridCell> grid;
            for (Combination c : parse_combinations(eval_combination)) {
                for (ClassifierKind k : parse_kinds(eval_kind)) grid.push_back({c, k});
            }
            const auto train_trials = load_dataset(eval_paths.input);
            const auto test2 = eval_test2.empty() ? std::vector<Trial>{} : load_dataset(eval_test2);
            const auto reports = repeated_eval(train_trials, test2, grid, eval_options);
            write_file_atomic(eval_paths.output, [&](std::ostream& o) { write_eval_report(o, reports); });
            return 0;
        };
    });

    // ftest
    Paths ftest_paths;
    std::size_t ftest_permutations = 10000;
    std::uint64_t ftest_seed = 0;
    auto* ftest = app.add_subcommand("ftest", "Per-feature grasp-vs-view F-tests from a feature dump");
    ftest->add_option("-i,--input", ftest_paths.input, "Feature dump CSV")->required();
    ftest->add_option("-o,--output", ftest_paths.output, "Report CSV")->required();
    ftest->add_option("--permutations", ftest_permutations, "Label permutations")->capture_default_str();
    ftest->add_option("--seed", ftest_seed, "Random seed")->required();
    ftest->callback([&] {
        action = [&] {
            if (ftest_permutations == 0) throw InvalidInputError("--permutations must be positive");
            auto in = open_input(ftest_paths.input);
            const auto records = read_feature_dump(in);
            struct Pair {
                const char* name;
                std::optional<GraspAxis> axis;
            };
            const Pair pairs[] = {{"vertical_grasp_vs_view", GraspAxis::Vertical},
                                  {"horizontal_grasp_vs_view", GraspAxis::Horizontal},
                                  {"grasp_vs_view", std::nullopt}};
            const Feature features[] = {Feature::Adf2c, Feature::Adf2i, Feature::Adf2t, Feature::Var};
            std::vector<FTestRow> rows;
            for (Feature f : features) {
                for (const Pair& p : pairs) {
                    std::vector<std::vector<double>> groups(2);
                    for (const FeatureRecord& r : records) {
                        if (r.task_label == TaskLabel::Unlabeled) continue;
                        if (p.axis && r.grasp_axis != *p.axis) continue;
                        groups[r.task_label == TaskLabel::Grasp ? 0 : 1].push_back(value_of(r.features, f));
                    }
                    FTestRow row{f, p.name, std::nullopt};
                    if (groups[0].size() >= 2 && groups[1].size() >= 2) {
                        row.result = one_way_f_test(groups, ftest_permutations, ftest_seed);
                    }
                    rows.push_back(std::move(row));
                }
            }
            write_file_atomic(ftest_paths.output, [&](std::ostream& o) { write_ftest_report(o, rows); });
            return 0;
        };
    });

    // replay
    Paths replay_paths;
    std::string replay_context;
    std::string replay_model;
    WindowConfig replay_window;
    FixationDetectorConfig replay_detector;
    auto* replay = app.add_subcommand("replay", "Run the streaming recognizer over a gaze file");
    replay->add_option("-i,--input", replay_paths.input, "Gaze stream CSV")->required();
    replay->add_option("--context", replay_context, "Object context JSON")->required();
    replay->add_option("--model", replay_model, "Model JSON")->required();
    replay->add_option("-o,--output", replay_paths.output, "Event log (one record per line)")->required();
    add_window_options(replay, replay_window);
    add_detector_options(replay, replay_detector);
    replay->callback([&] {
        action = [&] {
            replay_window.validate();
            replay_detector.validate();
            const ObjectContext context = context_from_json(load_json(replay_context));
            auto model = std::make_shared<const TrainedModel>(load_model(replay_model));
            const auto samples = load_gaze(replay_paths.input);
            Session session(context, std::move(model), replay_window, replay_detector);
            const auto events = session.push_samples(samples);
            write_file_atomic(replay_paths.output, [&](std::ostream& o) {
                for (const IntentionEvent& e : events) o << event_line(e) << '\n';
            });
            return 0;
        };
    });

    // serve
    std::string serve_host = "127.0.0.1";
    std::uint16_t serve_port = 8765;
    unsigned serve_threads = 2;
    std::vector<std::string> serve_models;
    std::string serve_models_dir;
    std::optional<std::uint64_t> serve_seed;
    auto* serve_cmd = app.add_subcommand("serve", "Start the streaming WebSocket service");
    serve_cmd->add_option("--host", serve_host, "Bind address")->envname("GAZEINTENT_HOST")->capture_default_str();
    serve_cmd->add_option("--port", serve_port, "Port (0 picks a free one)")
        ->envname("GAZEINTENT_PORT")
        ->capture_default_str();
    serve_cmd->add_option("--threads", serve_threads, "I/O threads")->capture_default_str();
    serve_cmd->add_option("--model", serve_models, "Model JSON file(s); the first is the default");
    serve_cmd->add_option("--models-dir", serve_models_dir, "Directory of model JSON files");
    serve_cmd->add_option("--seed", serve_seed, "Seed for the built-in model when no model is given");
    serve_cmd->callback([&] {
        action = [&] {
            auto store = std::make_shared<ModelStore>();
            for (const std::string& m : serve_models) store->load_file(m);
            if (!serve_models_dir.empty()) store->load_directory(serve_models_dir);
            if (store->empty()) {
                if (!serve_seed) throw InvalidInputError("no models given; pass --model or --seed for the built-in one");
                store->add("default", default_model(*serve_seed));
            }
            return serve(serve_host, serve_port, serve_threads, std::move(store), out);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    try {
        return action ? action() : 1;
    } catch (const std::exception& e) {
        err << "gazeintent " << app.get_subcommands().front()->get_name() << ": error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace gazeintent::cli
