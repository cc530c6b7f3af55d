#pragma once

#include "devminer/history.hpp"
#include "devminer/labeling.hpp"
#include "devminer/networks.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace devminer::metrics {

using history::CommitRecord;

struct ScriptCommit {
    std::string commit_id;
    std::string author;
    std::int64_t timestamp = 0;
    history::FileChange change;  ///< this script's change only
};

/// Commits touching one script, ordered by (timestamp, commit id).
struct ScriptHistory {
    std::string script_path;
    std::vector<ScriptCommit> commits;
};

ScriptHistory make_history(const std::string& script, std::span<const CommitRecord> commits);

/// Histories for every path accepted by `include`, keyed by path.
std::map<std::string, ScriptHistory> script_histories(std::span<const CommitRecord> commits,
                                                      const std::function<bool(std::string_view)>& include = {});

struct LineAttribution {
    std::string script_path;
    std::vector<std::string> per_line_author;  ///< index 0 is line 1
};

/// Last-writer-wins replay of the history. Written lines take the commit's
/// author; untouched post-image lines inherit the surviving pre-image lines in
/// order. Pre-image lines that disappear are taken first at rewritten
/// positions, then from the end of the file.
LineAttribution attribute_lines(const ScriptHistory& history);

/// Surviving line count per author.
std::map<std::string, std::size_t> ownership(const LineAttribution& attr);

double highest_contrib_code(const LineAttribution& attr);

inline constexpr double kMinorOwnershipShare = 0.05;

/// Developers with at least one commit whose ownership is at most 5%.
std::size_t minor_contributors(const LineAttribution& attr, const ScriptHistory& history);

std::size_t developer_count(const ScriptHistory& history);

double norm_commit_size(const ScriptHistory& history);

/// -sum x_i log2 x_i where x_i is the share of the script's commits that wrote line i.
double scatteredness(const ScriptHistory& history);

double unfocused_contribution(const net::ContributionNetwork& net, const std::string& script);

double disjointness(const net::DeveloperNetwork& net, const std::map<net::Edge, double>& betweenness,
                    const std::string& script);

inline constexpr double kSecondsPerMonth = 30.44 * 86400.0;

struct SizeAge {
    std::size_t size_loc = 0;
    double age_months = 0.0;
};

SizeAge size_and_age(const ScriptHistory& history, const LineAttribution& attr);

struct MetricVector {
    std::string script_path;
    std::size_t developer_count = 0;
    double disjointness = 0.0;
    std::optional<double> highest_contrib_code;   ///< empty for scripts with no surviving lines
    std::optional<std::size_t> minor_contributors;  ///< empty for scripts with no surviving lines
    double norm_commit_size = 0.0;
    double scatteredness = 0.0;
    double unfocused_contribution = 0.0;
    std::size_t size_loc = 0;
    double age_months = 0.0;
    bool is_defective = false;
};

struct Dataset {
    std::vector<CommitRecord> commits;
    std::vector<labeling::ScriptClass> scripts;
};

struct MetricOptions {
    bool normalize_edge_betweenness = true;
};

std::vector<MetricVector> metric_table(const Dataset& dataset, const MetricOptions& options = {});

/// Names of the seven activity metrics in CSV column order.
const std::vector<std::string>& activity_metric_names();

/// Value of an activity metric by CSV column name; empty when undefined.
std::optional<double> metric_value(const MetricVector& row, const std::string& name);

void write_metric_csv(std::ostream& out, std::span<const MetricVector> table);
std::vector<MetricVector> parse_metric_csv(std::string_view text);
std::vector<MetricVector> read_metric_csv(const std::string& path);

}  // namespace devminer::metrics
