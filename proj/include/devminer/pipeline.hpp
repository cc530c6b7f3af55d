#pragma once

#include "devminer/antipatterns.hpp"
#include "devminer/config.hpp"
#include "devminer/error.hpp"
#include "devminer/history.hpp"
#include "devminer/learners.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

/// File-to-file stage functions shared by the CLI subcommands and `run`.
namespace devminer::pipeline {

namespace fs = std::filesystem;

/// A stage failure tagged with the stage name; keeps the original error kind.
struct StageError : Error {
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), "stage " + stage + ": " + cause.what()), stage(std::move(stage)) {}
    std::string stage;
};

struct IngestSettings {
    fs::path source;
    history::SourceFormat format = history::SourceFormat::jsonl;
    std::vector<std::string> iac_extensions{".pp"};
    std::optional<fs::path> alias_map;
};

struct IngestOutcome {
    history::RepositorySummary summary;
    history::CriteriaVerdict verdict;
};

/// Writes the normalized log export to `out`; with `summary_out`, also a JSON
/// summary of file counts, monthly activity and the selection criteria.
IngestOutcome run_ingest(const IngestSettings& settings, const fs::path& out,
                         const std::optional<fs::path>& summary_out = std::nullopt);

struct LabelSettings {
    std::optional<fs::path> rules;
    std::optional<fs::path> imported;
    std::optional<fs::path> issues;
};

/// Returns the number of defect-related commits.
std::size_t run_label(const fs::path& commits, const LabelSettings& settings, const fs::path& out);

struct MetricSettings {
    std::vector<std::string> iac_extensions{".pp"};
    bool normalize_edge_betweenness = true;
};

/// Returns the number of scripts.
std::size_t run_metrics(const fs::path& commits, const fs::path& labels, const MetricSettings& settings,
                        const fs::path& out);

enum class GraphKind { developer, contribution };

void run_graph(const fs::path& commits, GraphKind kind, const std::vector<std::string>& iac_extensions,
               const fs::path& out);

void run_analyze(const fs::path& metrics, const fs::path& out);

enum class FeatureKind { bow, quality };

struct FeatureSettings {
    fs::path scripts;
    std::vector<std::string> iac_extensions{".pp"};
    std::optional<fs::path> lint;
};

void run_features(FeatureKind kind, const FeatureSettings& settings, const fs::path& out);

struct PredictSettings {
    std::uint64_t seed = 42;
    bool tune = false;
    int repeats = 10;
    int folds = 10;
    int de_generations = 10;
    int sk_bootstrap = 1000;
    std::vector<ml::LearnerKind> learners = ml::all_learners();
};

void run_predict(const fs::path& metrics, const fs::path& bow, const fs::path& quality, const PredictSettings& settings,
                 const fs::path& out);

struct ReportSettings {
    antipatterns::ThresholdConfig thresholds;
    std::optional<fs::path> stats;
    std::optional<fs::path> prediction;
    std::optional<fs::path> survey;
};

/// Writes `<out_stem>.txt` and `<out_stem>.json`.
void run_report(const fs::path& metrics, const ReportSettings& settings, const fs::path& out_stem);

/// Everything `run` needs, read from a TOML config. Relative paths resolve
/// against the config file's directory.
struct RunSettings {
    fs::path output;
    IngestSettings ingest;
    LabelSettings label;
    MetricSettings metrics;
    FeatureSettings features;
    PredictSettings predict;
    ReportSettings report;
};

RunSettings load_run_settings(const Config& config, const fs::path& base_dir);

/// Overrides only the settings present in `config`.
void apply_config(const Config& config, const fs::path& base_dir, RunSettings& settings);

/// Artifact file names inside the output directory, in stage order.
const std::vector<std::string>& run_artifacts();

/// ingest -> label -> metrics -> analyze -> features -> predict -> report.
/// Errors are rethrown as StageError naming the failing stage.
void run_pipeline(const RunSettings& settings, const std::function<void(const std::string&)>& progress = {});

}  // namespace devminer::pipeline
