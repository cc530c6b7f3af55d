#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace devminer::history {

/// Churn of one file within one commit.
struct FileChange {
    std::string path;
    std::int64_t lines_added = 0;
    std::int64_t lines_deleted = 0;
    /// Post-image line numbers (1-based, sorted, unique) written by this
    /// commit's hunks. Pure deletions have no post-image line and do not
    /// appear here.
    std::vector<std::int64_t> modified_lines;

    friend bool operator==(const FileChange&, const FileChange&) = default;
};

struct CommitRecord {
    std::string id;
    std::string author;
    std::int64_t timestamp = 0;  ///< UTC seconds
    std::string message;
    std::vector<FileChange> changes;

    friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

struct MonthCount {
    int year = 0;
    unsigned month = 0;
    std::size_t commits = 0;

    friend bool operator==(const MonthCount&, const MonthCount&) = default;
};

struct RepositorySummary {
    std::string repo_id;
    std::size_t total_files = 0;
    std::size_t iac_files = 0;
    std::vector<MonthCount> commit_months;
    std::vector<CommitRecord> commits;
};

enum class SourceFormat { git, jsonl };

using AliasMap = std::map<std::string, std::string>;

/// Extension-based recognizer for IaC scripts. Matches the terminal
/// extension only, so `site.pp.erb` is not a `.pp` script.
class IacFilter {
public:
    IacFilter() : extensions_{".pp"} {}
    explicit IacFilter(std::vector<std::string> extensions);

    bool operator()(std::string_view path) const;
    const std::vector<std::string>& extensions() const { return extensions_; }

private:
    std::vector<std::string> extensions_;
};

bool is_iac_script(std::string_view path, const IacFilter& filter = {});

struct IngestOptions {
    SourceFormat format = SourceFormat::jsonl;
    IacFilter filter;
    AliasMap aliases;
};

/// Lowercases the identity and resolves it through the alias map.
std::string normalize_identity(std::string_view raw, const AliasMap& aliases);

/// Reads a JSON object `{"alias": "canonical", ...}`; keys and values are lowercased.
AliasMap load_alias_map(const std::filesystem::path& file);

/// Parses the JSON Lines log export. Throws ParseError carrying the line number.
std::vector<CommitRecord> parse_log_export(std::string_view text, const AliasMap& aliases = {});

std::string to_log_export_line(const CommitRecord& commit);
void write_log_export(std::ostream& out, std::span<const CommitRecord> commits);

/// Parses the output of the git invocation issued by ingest_repository.
/// Exposed so the parser can be tested without a repository.
std::vector<CommitRecord> parse_git_log(std::string_view raw, const AliasMap& aliases = {});

/// Months from the earliest to the latest commit, inclusive, including
/// months with no commits.
std::vector<MonthCount> commit_months(std::span<const CommitRecord> commits);

RepositorySummary ingest_repository(const std::filesystem::path& source, const IngestOptions& options);

struct CriteriaVerdict {
    bool available = false;         ///< Criterion-1
    bool iac_share_pass = false;    ///< Criterion-2
    bool zero_denominator = false;  ///< no files at all
    double iac_share = 0.0;
    bool activity_pass = false;     ///< Criterion-3
    double median_monthly_commits = 0.0;
    bool final = false;
};

inline constexpr double kMinIacShare = 0.11;
inline constexpr double kMinMedianMonthlyCommits = 2.0;

CriteriaVerdict apply_selection_criteria(const RepositorySummary& summary);

}  // namespace devminer::history
