#pragma once

#include "gazeintent/features.hpp"
#include "gazeintent/gaze.hpp"
#include "gazeintent/learn.hpp"
#include "gazeintent/stats.hpp"
#include "gazeintent/stream.hpp"
#include "gazeintent/synth.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gazeintent {

using Json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// --- CSV record files -------------------------------------------------------
// Comma-separated with a header row naming the columns; '#' lines and blank
// lines are ignored. Columns are matched by name.

std::vector<GazeSample> read_gaze_csv(std::istream& in);
void write_gaze_csv(std::ostream& out, std::span<const GazeSample> samples);

std::vector<Fixation> read_fixations_csv(std::istream& in);
void write_fixations_csv(std::ostream& out, std::span<const Fixation> fixations);

/// One row of the feature dump.
struct FeatureRecord {
    std::string trial_id;
    TaskLabel task_label = TaskLabel::Unlabeled;
    FeatureVector features;
    std::string shape_id;
    GraspAxis grasp_axis = GraspAxis::Horizontal;
};

FeatureRecord feature_record(const Trial& trial);
std::vector<FeatureRecord> read_feature_dump(std::istream& in);
void write_feature_dump(std::ostream& out, std::span<const FeatureRecord> records);

// --- JSON documents ---------------------------------------------------------

Json to_json(const ObjectContext& context);
ObjectContext context_from_json(const Json& j);

Json to_json(const Fixation& fixation);
Fixation fixation_from_json(const Json& j);

Json to_json(const Trial& trial);
Trial trial_from_json(const Json& j);

Json to_json(const FeatureVector& features);
FeatureVector features_from_json(const Json& j);

Json to_json(const WindowConfig& window);
/// Fields absent from `j` keep the values of `base`.
WindowConfig window_from_json(const Json& j, WindowConfig base = {});

Json to_json(const SynthConfig& config);

/// Model document: format_version, kind, combination, standardization,
/// parameters.
Json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const Json& j);

/// One event-log record (no trailing newline).
std::string event_line(const IntentionEvent& event);

/// Dataset: one trial document per line.
std::vector<Trial> read_dataset(std::istream& in);
void write_dataset(std::ostream& out, std::span<const Trial> trials);

// --- Reports ----------------------------------------------------------------

void write_eval_report(std::ostream& out, std::span<const CellReport> cells);

struct FTestRow {
    Feature feature;
    std::string pair;  ///< e.g. "grasp_vs_view"
    std::optional<FTestResult> result;
};

void write_ftest_report(std::ostream& out, std::span<const FTestRow> rows);

// --- Files ------------------------------------------------------------------

/// Writes to a sibling temporary file and renames it into place, so `path`
/// either keeps its old contents or holds the complete new ones.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace gazeintent
