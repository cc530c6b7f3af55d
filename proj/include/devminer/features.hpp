#pragma once

#include "devminer/history.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace devminer::features {

/// Sparse token counts of one script.
struct BowVector {
    std::string script_path;
    std::map<std::string, std::size_t> token_counts;
};

/// Byte offset of the first invalid UTF-8 sequence, or npos.
std::size_t first_invalid_utf8(std::string_view text);

/// Lowercased runs of alphanumerics. Non-ASCII code points count as
/// alphanumeric; only ASCII letters are folded. Throws EncodingError on
/// malformed UTF-8.
BowVector bow_extract(std::string_view script_text, std::string script_path = {});

struct CodeQualityVector {
    std::string script_path;
    std::size_t filelength = 0;
    std::size_t complexity = 0;
    std::size_t parameters = 0;
    std::size_t execs = 0;
    std::size_t lint_warnings = 0;
    std::size_t fan_in = 0;
};

/// Per-script facts from the lexical scan, before dataset-wide fan-in.
struct ScriptScan {
    CodeQualityVector quality;
    std::vector<std::string> declared_classes;
    std::vector<std::string> referenced_classes;  ///< include/require targets
};

ScriptScan scan_script(std::string_view script_text, std::string script_path = {});

struct ScriptSource {
    std::string path;
    std::string text;
};

/// Scans every script and resolves fan-in: each include/require naming a
/// class declared in another script adds one incoming edge to every script
/// declaring it. Lint counts come from `lint_warnings` (path -> count).
std::vector<CodeQualityVector> scan_quality(std::span<const ScriptSource> scripts,
                                            const std::map<std::string, std::size_t>& lint_warnings = {});

/// Single-script convenience over scan_quality; `dataset` supplies the other scripts.
CodeQualityVector scan_quality(const ScriptSource& script, std::span<const ScriptSource> dataset);

/// Reads `script,count` (header `script,lint_warnings`).
std::map<std::string, std::size_t> parse_lint_csv(std::string_view text);

/// Recursively loads regular files under `dir` accepted by `filter`; paths are
/// relative to `dir` with '/' separators, sorted.
std::vector<ScriptSource> load_scripts(const std::filesystem::path& dir, const history::IacFilter& filter = {});

void write_bow_csv(std::ostream& out, std::span<const BowVector> vectors);
std::vector<BowVector> parse_bow_csv(std::string_view text);

void write_quality_csv(std::ostream& out, std::span<const CodeQualityVector> vectors);
std::vector<CodeQualityVector> parse_quality_csv(std::string_view text);

const std::vector<std::string>& quality_feature_names();

}  // namespace devminer::features
