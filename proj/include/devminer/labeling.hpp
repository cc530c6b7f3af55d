#pragma once

#include "devminer/history.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <vector>

namespace devminer::labeling {

using history::CommitRecord;

/// Issue identifier -> summary text, typically loaded from a JSON file.
class IssueStore {
public:
    IssueStore() = default;
    explicit IssueStore(std::map<std::string, std::string> summaries) : summaries_(std::move(summaries)) {}

    static IssueStore load(const std::filesystem::path& file);

    std::optional<std::string> summary(const std::string& id) const;
    bool empty() const { return summaries_.empty(); }

private:
    std::map<std::string, std::string> summaries_;
};

/// One issue-id pattern. Capture group 1 is the id when present, otherwise the whole match.
struct IssuePattern {
    std::string source;
    bool case_insensitive = false;
};

std::vector<IssuePattern> default_issue_patterns();

struct ExtendedCommitMessage {
    std::string commit_id;
    std::string text;
    std::vector<std::string> issue_ids;
};

/// Extracts issue ids in order of first appearance (deduplicated). Each
/// resolvable id appends its summary after a single newline.
ExtendedCommitMessage build_ecm(const CommitRecord& commit, const IssueStore& issues,
                                const std::vector<IssuePattern>& patterns = default_issue_patterns());

struct Ruleset {
    std::vector<std::string> keywords;
    std::vector<std::string> negations;  ///< phrases removed from the text before matching

    static Ruleset defaults();
    /// JSON `{"keywords": [...], "negations": [...]}`; a missing key keeps the default.
    static Ruleset load(const std::filesystem::path& file);
};

enum class LabelSource { heuristic, imported };

struct DefectLabel {
    std::string commit_id;
    bool is_defect_related = false;
    LabelSource source = LabelSource::heuristic;
    std::vector<std::string> matched_keywords;  ///< heuristic labels only
    std::vector<std::optional<bool>> rater_votes;  ///< imported labels: rater_1, rater_2
    std::optional<bool> resolver;
};

DefectLabel classify_ecm(const ExtendedCommitMessage& ecm, const Ruleset& rules);

/// Label CSV with header `commit_id,rater_1,rater_2,resolver`.
std::vector<DefectLabel> import_labels(std::string_view csv_text);
std::vector<DefectLabel> import_labels_file(const std::filesystem::path& file);

/// Two-category Cohen's kappa. Returns 1.0 when expected agreement is 1.
double cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

struct ScriptClass {
    std::string script_path;
    bool is_defective = false;

    friend bool operator==(const ScriptClass&, const ScriptClass&) = default;
};

/// Whole-history labeling: a script is defective iff some defect-related
/// commit touches it. Output is sorted by path. `include` restricts which
/// paths count as scripts.
std::vector<ScriptClass> label_scripts(std::span<const DefectLabel> labels, std::span<const CommitRecord> commits,
                                       const std::function<bool(std::string_view)>& include = {});

/// Heuristic labels for every commit, with imported labels overriding the
/// commits they cover.
std::vector<DefectLabel> label_commits(std::span<const CommitRecord> commits, const IssueStore& issues,
                                       const Ruleset& rules, std::span<const DefectLabel> imported = {});

std::string to_jsonl_line(const DefectLabel& label);
std::vector<DefectLabel> parse_labels_jsonl(std::string_view text);

}  // namespace devminer::labeling
