#include "gazeintent/io.hpp"

#include "gazeintent/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>
#include <variant>
#include <unistd.h>

namespace gazeintent {

namespace fs = std::filesystem;

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc{}) throw FormatError("cannot format number");
    return std::string(buffer, end);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Header-led CSV; cells of the current row are looked up by column name.
// Line numbers in diagnostics are 1-based.
class CsvReader {
public:
    CsvReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

    void require(std::initializer_list<std::string_view> names) {
        read_header();
        for (std::string_view n : names) {
            if (!columns_.count(std::string(n))) {
                throw FormatError(what_ + ": missing column '" + std::string(n) + "'");
            }
        }
    }

    bool next() {
        while (std::getline(in_, line_)) {
            ++line_no_;
            const std::string_view t = trim(line_);
            if (t.empty() || t.front() == '#') continue;
            cells_ = split_commas(t);
            if (cells_.size() != columns_.size()) {
                fail("expected " + std::to_string(columns_.size()) + " fields, found " +
                     std::to_string(cells_.size()));
            }
            return true;
        }
        return false;
    }

    std::string_view text(std::string_view name) const { return cells_[columns_.at(std::string(name))]; }

    double number(std::string_view name) const {
        const std::string_view cell = text(name);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
            fail("column '" + std::string(name) + "': '" + std::string(cell) + "' is not a number");
        }
        return v;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw FormatError(what_ + " line " + std::to_string(line_no_) + ": " + message);
    }

private:
    void read_header() {
        while (std::getline(in_, line_)) {
            ++line_no_;
            const std::string_view t = trim(line_);
            if (t.empty() || t.front() == '#') continue;
            const auto names = split_commas(t);
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (!columns_.emplace(std::string(names[i]), i).second) {
                    fail("duplicate column '" + std::string(names[i]) + "'");
                }
            }
            return;
        }
        throw FormatError(what_ + ": missing header row");
    }

    std::istream& in_;
    std::string what_;
    std::string line_;
    std::size_t line_no_ = 0;
    std::map<std::string, std::size_t> columns_;
    std::vector<std::string_view> cells_;
};

Json point_json(Point2 p) { return Json::array({p.x, p.y}); }

Point2 point_from_json(const Json& j, const char* field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw FormatError(std::string("field '") + field + "' must be an [x, y] pair");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

const Json& field(const Json& j, const char* name) {
    if (!j.is_object()) throw FormatError("expected a JSON object");
    const auto it = j.find(name);
    if (it == j.end()) throw FormatError(std::string("missing field '") + name + "'");
    return *it;
}

double number_field(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number()) throw FormatError(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

std::string string_field(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_string()) throw FormatError(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> number_array(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_array()) throw FormatError(std::string("field '") + name + "' must be an array");
    std::vector<double> out;
    for (const Json& x : v) {
        if (!x.is_number()) throw FormatError(std::string("field '") + name + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

// Model documents use the enum spellings of the data model; the short CLI
// names are accepted on input.
std::string_view model_kind_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Knn: return "KNN";
        case ClassifierKind::SvmLinear: return "SVM_LINEAR";
        case ClassifierKind::SgdLogistic: return "SGD_LOGISTIC";
        case ClassifierKind::DecisionTree: return "DECISION_TREE";
    }
    return "KNN";
}

ClassifierKind model_kind_from(std::string_view text) {
    for (ClassifierKind k : kAllKinds) {
        if (model_kind_name(k) == text) return k;
    }
    return kind_from_string(text);
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

Label label_from(const Json& j) {
    if (!j.is_string()) throw FormatError("label must be a string");
    const TaskLabel t = task_label_from_string(j.get<std::string>());
    if (t == TaskLabel::Unlabeled) throw FormatError("model labels must be GRASP or VIEW");
    return label_of(t);
}

template <typename Parse>
auto wrap_format(const char* what, Parse&& parse) {
    try {
        return parse();
    } catch (const FormatError& e) {
        throw FormatError(std::string(what) + ": " + e.what());
    } catch (const InvalidInputError& e) {
        throw FormatError(std::string(what) + ": " + e.what());
    } catch (const Json::exception& e) {
        throw FormatError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

// --- CSV --------------------------------------------------------------------

std::vector<GazeSample> read_gaze_csv(std::istream& in) {
    CsvReader csv(in, "gaze stream");
    csv.require({"t_ms", "x", "y", "confidence"});
    std::vector<GazeSample> out;
    while (csv.next()) {
        out.push_back({csv.number("t_ms"), csv.number("x"), csv.number("y"), csv.number("confidence")});
    }
    return out;
}

void write_gaze_csv(std::ostream& out, std::span<const GazeSample> samples) {
    out << "t_ms,x,y,confidence\n";
    for (const GazeSample& s : samples) {
        out << format_double(s.t_ms) << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
            << format_double(s.confidence) << '\n';
    }
}

std::vector<Fixation> read_fixations_csv(std::istream& in) {
    CsvReader csv(in, "fixations");
    csv.require({"t_start_ms", "duration_ms", "x", "y"});
    std::vector<Fixation> out;
    while (csv.next()) {
        out.push_back({csv.number("t_start_ms"), csv.number("duration_ms"), csv.number("x"), csv.number("y")});
    }
    return out;
}

void write_fixations_csv(std::ostream& out, std::span<const Fixation> fixations) {
    out << "t_start_ms,duration_ms,x,y\n";
    for (const Fixation& f : fixations) {
        out << format_double(f.t_start_ms) << ',' << format_double(f.duration_ms) << ','
            << format_double(f.x) << ',' << format_double(f.y) << '\n';
    }
}

FeatureRecord feature_record(const Trial& trial) {
    return {trial.trial_id, trial.task_label, compute_features(trial.fixations, trial.object),
            trial.object.shape_id, grasp_axis_of(trial.object)};
}

std::vector<FeatureRecord> read_feature_dump(std::istream& in) {
    CsvReader csv(in, "feature dump");
    csv.require({"trial_id", "task_label", "adf2c", "adf2i", "adf2t", "var", "n_fix", "shape_id", "grasp_axis"});
    std::vector<FeatureRecord> out;
    while (csv.next()) {
        FeatureRecord r;
        r.trial_id = std::string(csv.text("trial_id"));
        try {
            r.task_label = task_label_from_string(csv.text("task_label"));
            r.grasp_axis = grasp_axis_from_string(csv.text("grasp_axis"));
        } catch (const InvalidInputError& e) {
            csv.fail(e.what());
        }
        r.features.adf2c = csv.number("adf2c");
        r.features.adf2i = csv.number("adf2i");
        r.features.adf2t = csv.number("adf2t");
        r.features.var = csv.number("var");
        const double n = csv.number("n_fix");
        if (!(n >= 0.0) || n != std::floor(n)) csv.fail("n_fix must be a non-negative integer");
        r.features.n_fix = static_cast<std::size_t>(n);
        r.shape_id = std::string(csv.text("shape_id"));
        out.push_back(std::move(r));
    }
    return out;
}

void write_feature_dump(std::ostream& out, std::span<const FeatureRecord> records) {
    out << "trial_id,task_label,adf2c,adf2i,adf2t,var,n_fix,shape_id,grasp_axis\n";
    for (const FeatureRecord& r : records) {
        out << r.trial_id << ',' << to_string(r.task_label) << ',' << format_double(r.features.adf2c) << ','
            << format_double(r.features.adf2i) << ',' << format_double(r.features.adf2t) << ','
            << format_double(r.features.var) << ',' << r.features.n_fix << ',' << r.shape_id << ','
            << to_string(r.grasp_axis) << '\n';
    }
}

// --- JSON -------------------------------------------------------------------

Json to_json(const ObjectContext& c) {
    return Json{{"centroid", point_json(c.centroid)},
                {"grasp_thumb", point_json(c.grasp_thumb)},
                {"grasp_index", point_json(c.grasp_index)},
                {"shape_id", c.shape_id}};
}

ObjectContext context_from_json(const Json& j) {
    return wrap_format("object context", [&] {
        ObjectContext c;
        c.centroid = point_from_json(field(j, "centroid"), "centroid");
        c.grasp_thumb = point_from_json(field(j, "grasp_thumb"), "grasp_thumb");
        c.grasp_index = point_from_json(field(j, "grasp_index"), "grasp_index");
        c.shape_id = string_field(j, "shape_id");
        c.validate();
        return c;
    });
}

Json to_json(const Fixation& f) {
    return Json{{"t_start_ms", f.t_start_ms}, {"duration_ms", f.duration_ms}, {"x", f.x}, {"y", f.y}};
}

Fixation fixation_from_json(const Json& j) {
    return wrap_format("fixation", [&] {
        return Fixation{number_field(j, "t_start_ms"), number_field(j, "duration_ms"), number_field(j, "x"),
                        number_field(j, "y")};
    });
}

Json to_json(const Trial& t) {
    Json fixations = Json::array();
    for (const Fixation& f : t.fixations) fixations.push_back(to_json(f));
    return Json{{"trial_id", t.trial_id},
                {"participant_id", t.participant_id},
                {"task_label", to_string(t.task_label)},
                {"fixations", std::move(fixations)},
                {"object", to_json(t.object)}};
}

Trial trial_from_json(const Json& j) {
    return wrap_format("trial", [&] {
        Trial t;
        t.trial_id = string_field(j, "trial_id");
        t.participant_id = string_field(j, "participant_id");
        t.task_label = task_label_from_string(string_field(j, "task_label"));
        const Json& fixations = field(j, "fixations");
        if (!fixations.is_array()) throw FormatError("field 'fixations' must be an array");
        for (const Json& f : fixations) t.fixations.push_back(fixation_from_json(f));
        t.object = context_from_json(field(j, "object"));
        return t;
    });
}

Json to_json(const FeatureVector& f) {
    return Json{{"adf2c", f.adf2c}, {"adf2i", f.adf2i}, {"adf2t", f.adf2t}, {"var", f.var}, {"n_fix", f.n_fix}};
}

FeatureVector features_from_json(const Json& j) {
    return wrap_format("features", [&] {
        FeatureVector f;
        f.adf2c = number_field(j, "adf2c");
        f.adf2i = number_field(j, "adf2i");
        f.adf2t = number_field(j, "adf2t");
        f.var = number_field(j, "var");
        f.n_fix = field(j, "n_fix").get<std::size_t>();
        return f;
    });
}

Json to_json(const WindowConfig& w) {
    return Json{{"window_ms", w.window_ms},
                {"hop_ms", w.hop_ms},
                {"min_fixations", w.min_fixations},
                {"consecutive_required", w.consecutive_required},
                {"refractory_ms", w.refractory_ms}};
}

WindowConfig window_from_json(const Json& j, WindowConfig base) {
    return wrap_format("window config", [&] {
        if (!j.is_object()) throw FormatError("expected a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "window_ms") base.window_ms = value.get<double>();
            else if (key == "hop_ms") base.hop_ms = value.get<double>();
            else if (key == "min_fixations") base.min_fixations = value.get<std::size_t>();
            else if (key == "consecutive_required") base.consecutive_required = value.get<std::size_t>();
            else if (key == "refractory_ms") base.refractory_ms = value.get<double>();
            else throw FormatError("unknown field '" + key + "'");
        }
        base.validate();
        return base;
    });
}

Json to_json(const SynthConfig& c) {
    return Json{{"n_per_class", c.n_per_class},
                {"n_test_per_class", c.n_test_per_class},
                {"grasp_count_mean", c.grasp_count_mean},
                {"grasp_count_std", c.grasp_count_std},
                {"view_count_mean", c.view_count_mean},
                {"view_count_std", c.view_count_std},
                {"target_var_grasp", c.target_var_grasp},
                {"target_var_view", c.target_var_view},
                {"grasp_anchor", "INDEX_POINT"},
                {"seed", c.seed},
                {"train_shapes", c.train_shapes},
                {"test_shapes", c.test_shapes},
                {"scene_center", point_json(c.scene_center)},
                {"placement_jitter_px", c.placement_jitter_px},
                {"fixation_dur_min_ms", c.fixation_dur_min_ms},
                {"fixation_dur_max_ms", c.fixation_dur_max_ms},
                {"saccade_gap_min_ms", c.saccade_gap_min_ms},
                {"saccade_gap_max_ms", c.saccade_gap_max_ms}};
}

Json model_to_json(const TrainedModel& m) {
    Json parameters;
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, KnnParams>) {
                Json points = Json::array();
                const std::size_t dim = m.dim();
                for (std::size_t i = 0; i < p.labels.size(); ++i) {
                    points.push_back(std::vector<double>(p.points.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                                         p.points.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim)));
                }
                Json labels = Json::array();
                for (Label l : p.labels) labels.push_back(to_string(task_of(l)));
                parameters = Json{{"k", p.k}, {"points", std::move(points)}, {"labels", std::move(labels)}};
            } else if constexpr (std::is_same_v<P, LinearParams>) {
                parameters = Json{{"weights", p.weights}, {"bias", p.bias}};
            } else {
                Json nodes = Json::array();
                for (const TreeNode& n : p.nodes) {
                    nodes.push_back(Json{{"feature", n.feature},
                                         {"threshold", n.threshold},
                                         {"left", n.left},
                                         {"right", n.right},
                                         {"label", to_string(task_of(n.label))}});
                }
                parameters = Json{{"nodes", std::move(nodes)}};
            }
        },
        m.params);
    return Json{{"format_version", kModelFormatVersion},
                {"kind", model_kind_name(m.kind)},
                {"combination", upper(to_string(m.combination))},
                {"standardization", Json{{"mean", m.standardization.mean}, {"std", m.standardization.std}}},
                {"parameters", std::move(parameters)}};
}

TrainedModel model_from_json(const Json& j) {
    return wrap_format("model", [&] {
        const Json& version = field(j, "format_version");
        if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
            throw FormatError("unsupported format_version " + version.dump());
        }
        TrainedModel m;
        m.kind = model_kind_from(string_field(j, "kind"));
        m.combination = combination_from_string(string_field(j, "combination"));
        const Json& st = field(j, "standardization");
        m.standardization.mean = number_array(st, "mean");
        m.standardization.std = number_array(st, "std");
        const std::size_t dim = members(m.combination).size();
        if (m.standardization.mean.size() != dim || m.standardization.std.size() != dim) {
            throw FormatError("standardization length does not match combination " +
                              std::string(to_string(m.combination)));
        }
        for (double s : m.standardization.std) {
            if (!(s > 0.0) || !std::isfinite(s)) throw FormatError("standardization std must be positive");
        }

        const Json& p = field(j, "parameters");
        switch (m.kind) {
            case ClassifierKind::Knn: {
                KnnParams knn;
                knn.k = field(p, "k").get<int>();
                if (knn.k < 1) throw FormatError("k must be positive");
                const Json& points = field(p, "points");
                const Json& labels = field(p, "labels");
                if (!points.is_array() || !labels.is_array() || points.size() != labels.size() || points.empty()) {
                    throw FormatError("points and labels must be non-empty arrays of equal length");
                }
                for (std::size_t i = 0; i < points.size(); ++i) {
                    const auto row = points[i].get<std::vector<double>>();
                    if (row.size() != dim) throw FormatError("stored point has the wrong dimension");
                    knn.points.insert(knn.points.end(), row.begin(), row.end());
                    knn.labels.push_back(label_from(labels[i]));
                }
                m.params = std::move(knn);
                break;
            }
            case ClassifierKind::SvmLinear:
            case ClassifierKind::SgdLogistic: {
                LinearParams lin;
                lin.weights = number_array(p, "weights");
                lin.bias = number_field(p, "bias");
                if (lin.weights.size() != dim) throw FormatError("weight vector has the wrong dimension");
                m.params = std::move(lin);
                break;
            }
            case ClassifierKind::DecisionTree: {
                TreeParams tree;
                const Json& nodes = field(p, "nodes");
                if (!nodes.is_array() || nodes.empty()) throw FormatError("tree needs at least one node");
                const int count = static_cast<int>(nodes.size());
                for (int i = 0; i < count; ++i) {
                    const Json& n = nodes[static_cast<std::size_t>(i)];
                    TreeNode node;
                    node.feature = field(n, "feature").get<int>();
                    node.threshold = number_field(n, "threshold");
                    node.left = field(n, "left").get<int>();
                    node.right = field(n, "right").get<int>();
                    node.label = label_from(field(n, "label"));
                    if (node.feature >= 0) {
                        // Children must point forward so evaluation terminates.
                        if (node.feature >= static_cast<int>(dim) || node.left <= i || node.right <= i ||
                            node.left >= count || node.right >= count) {
                            throw FormatError("malformed tree node " + std::to_string(i));
                        }
                    }
                    tree.nodes.push_back(node);
                }
                m.params = std::move(tree);
                break;
            }
        }
        return m;
    });
}

std::string event_line(const IntentionEvent& e) {
    Json j{{"t_ms", e.t_ms},
           {"label", to_string(e.label)},
           {"fired", e.fired},
           {"features", e.window_features ? to_json(*e.window_features) : Json(nullptr)}};
    return j.dump();
}

std::vector<Trial> read_dataset(std::istream& in) {
    std::vector<Trial> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(trial_from_json(Json::parse(line)));
        } catch (const FormatError& e) {
            throw FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Json::exception& e) {
            throw FormatError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_dataset(std::ostream& out, std::span<const Trial> trials) {
    for (const Trial& t : trials) out << to_json(t).dump() << '\n';
}

// --- Reports ----------------------------------------------------------------

void write_eval_report(std::ostream& out, std::span<const CellReport> cells) {
    out << "combination,kind,testset,mean,std,n_repeats,grasp_as_grasp,grasp_as_view,view_as_grasp,view_as_view\n";
    auto row = [&](const GridCell& cell, std::string_view testset, const EvalReport& r) {
        out << to_string(cell.combination) << ',' << to_string(cell.kind) << ',' << testset << ','
            << format_double(r.mean) << ',' << format_double(r.std) << ',' << r.n_repeats << ','
            << r.confusion.grasp_as_grasp << ',' << r.confusion.grasp_as_view << ','
            << r.confusion.view_as_grasp << ',' << r.confusion.view_as_view << '\n';
    };
    for (const CellReport& c : cells) {
        row(c.cell, "test1", c.test1);
        if (c.test2) row(c.cell, "test2", *c.test2);
    }
}

void write_ftest_report(std::ostream& out, std::span<const FTestRow> rows) {
    // Pivot: one line per feature, four columns per task pair.
    std::vector<std::string> pairs;
    std::vector<Feature> features;
    for (const FTestRow& r : rows) {
        if (std::find(pairs.begin(), pairs.end(), r.pair) == pairs.end()) pairs.push_back(r.pair);
        if (std::find(features.begin(), features.end(), r.feature) == features.end()) features.push_back(r.feature);
    }
    out << "feature";
    for (const std::string& p : pairs) out << ',' << p << "_f," << p << "_p," << p << "_df_between," << p << "_df_within";
    out << ",n_permutations\n";
    for (Feature f : features) {
        out << to_string(f);
        std::size_t n_perm = 0;
        for (const std::string& p : pairs) {
            const FTestRow* hit = nullptr;
            for (const FTestRow& r : rows) {
                if (r.feature == f && r.pair == p) hit = &r;
            }
            if (hit != nullptr && hit->result) {
                const FTestResult& t = *hit->result;
                out << ',' << format_double(t.f_statistic) << ',' << format_double(t.p_value) << ','
                    << t.df_between << ',' << t.df_within;
                n_perm = t.n_permutations;
            } else {
                out << ",,,,";
            }
        }
        out << ',' << n_perm << '\n';
    }
}

// --- Files ------------------------------------------------------------------

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        try {
            writer(out);
        } catch (...) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw;
        }
        out.flush();
        if (!out) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw Error("write to '" + path.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw Error("cannot move output into '" + path.string() + "': " + ec.message());
    }
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace gazeintent
