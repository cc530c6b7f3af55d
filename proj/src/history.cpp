#include "devminer/history.hpp"

#include "devminer/error.hpp"
#include "devminer/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

namespace devminer::history {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

/// Runs a shell command and returns stdout; throws IngestError on non-zero exit.
std::string run_command(const std::string& command) {
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
    if (!pipe) throw IngestError("cannot launch: " + command);
    std::string out;
    std::array<char, 65536> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe.release());
    if (status != 0) throw IngestError("command failed (status " + std::to_string(status) + "): " + command);
    return out;
}

std::int64_t require_int(const ordered_json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_integer()) throw ParseError(std::string("missing integer field '") + key + "'", line);
    return it->get<std::int64_t>();
}

std::string require_string(const ordered_json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) throw ParseError(std::string("missing string field '") + key + "'", line);
    return it->get<std::string>();
}

void canonicalize(std::vector<std::int64_t>& lines) {
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
}

std::string strip_path_quotes(std::string_view p) {
    if (p.size() >= 2 && p.front() == '"' && p.back() == '"') {
        std::string out;
        for (std::size_t i = 1; i + 1 < p.size(); ++i) {
            if (p[i] == '\\' && i + 2 < p.size()) {
                ++i;
                out.push_back(p[i] == 't' ? '\t' : p[i] == 'n' ? '\n' : p[i]);
            } else {
                out.push_back(p[i]);
            }
        }
        return out;
    }
    return std::string(p);
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

/// "@@ -a,b +c,d @@" -> c
std::int64_t hunk_new_start(std::string_view header) {
    const std::size_t plus = header.find(" +");
    if (plus == std::string_view::npos) return 1;
    std::size_t i = plus + 2;
    std::int64_t v = 0;
    while (i < header.size() && std::isdigit(static_cast<unsigned char>(header[i]))) v = v * 10 + (header[i++] - '0');
    return v;
}

}  // namespace

IacFilter::IacFilter(std::vector<std::string> extensions) : extensions_(std::move(extensions)) {
    for (auto& ext : extensions_) {
        if (!ext.empty() && ext.front() != '.') ext.insert(ext.begin(), '.');
    }
}

bool IacFilter::operator()(std::string_view path) const {
    const std::size_t slash = path.find_last_of('/');
    const std::string_view name = slash == std::string_view::npos ? path : path.substr(slash + 1);
    const std::size_t dot = name.find_last_of('.');
    if (dot == std::string_view::npos || dot == 0) return false;
    const std::string_view ext = name.substr(dot);
    return std::find(extensions_.begin(), extensions_.end(), ext) != extensions_.end();
}

bool is_iac_script(std::string_view path, const IacFilter& filter) { return filter(path); }

std::string normalize_identity(std::string_view raw, const AliasMap& aliases) {
    std::string id = lowercase(raw);
    const auto it = aliases.find(id);
    return it == aliases.end() ? id : it->second;
}

AliasMap load_alias_map(const std::filesystem::path& file) {
    const std::string text = io::read_text(file);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("alias map: ") + e.what(), 1);
    }
    if (!doc.is_object()) throw ParseError("alias map must be a JSON object", 1);
    AliasMap aliases;
    for (const auto& [alias, canonical] : doc.items()) {
        if (!canonical.is_string()) throw ParseError("alias map value for '" + alias + "' is not a string", 1);
        aliases[lowercase(alias)] = lowercase(canonical.get<std::string>());
    }
    return aliases;
}

std::vector<CommitRecord> parse_log_export(std::string_view text, const AliasMap& aliases) {
    std::vector<CommitRecord> commits;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        ordered_json obj;
        try {
            obj = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);

        CommitRecord commit;
        commit.id = require_string(obj, "id", line_no);
        commit.author = normalize_identity(require_string(obj, "author", line_no), aliases);
        commit.timestamp = require_int(obj, "ts", line_no);
        commit.message = require_string(obj, "msg", line_no);
        if (!seen.insert(commit.id).second) throw ParseError("duplicate commit id '" + commit.id + "'", line_no);

        const auto changes = obj.find("changes");
        if (changes == obj.end() || !changes->is_array()) throw ParseError("missing array field 'changes'", line_no);
        for (const auto& c : *changes) {
            if (!c.is_object()) throw ParseError("change entry is not an object", line_no);
            FileChange change;
            change.path = require_string(c, "path", line_no);
            change.lines_added = require_int(c, "add", line_no);
            change.lines_deleted = require_int(c, "del", line_no);
            if (change.lines_added < 0 || change.lines_deleted < 0) throw ParseError("negative line count", line_no);
            const auto lines = c.find("lines");
            if (lines == c.end() || !lines->is_array()) throw ParseError("missing array field 'lines'", line_no);
            for (const auto& l : *lines) {
                if (!l.is_number_integer() || l.get<std::int64_t>() < 1) throw ParseError("line numbers must be positive integers", line_no);
                change.modified_lines.push_back(l.get<std::int64_t>());
            }
            canonicalize(change.modified_lines);
            if (static_cast<std::int64_t>(change.modified_lines.size()) > change.lines_added + change.lines_deleted)
                throw ParseError("more modified lines than added+deleted for " + change.path, line_no);
            commit.changes.push_back(std::move(change));
        }
        commits.push_back(std::move(commit));
    }
    return commits;
}

std::string to_log_export_line(const CommitRecord& commit) {
    ordered_json obj;
    obj["id"] = commit.id;
    obj["author"] = commit.author;
    obj["ts"] = commit.timestamp;
    obj["msg"] = commit.message;
    ordered_json changes = ordered_json::array();
    for (const auto& c : commit.changes) {
        ordered_json change;
        change["path"] = c.path;
        change["add"] = c.lines_added;
        change["del"] = c.lines_deleted;
        change["lines"] = c.modified_lines;
        changes.push_back(std::move(change));
    }
    obj["changes"] = std::move(changes);
    return obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_log_export(std::ostream& out, std::span<const CommitRecord> commits) {
    for (const auto& c : commits) out << to_log_export_line(c) << '\n';
}

// Record layout produced by ingest_repository's git invocation:
//   \x1e <hash> \x1f <email> \x1f <unix ts> \x1f <parents> \x1f <body> \x1f \n <patch>
std::vector<CommitRecord> parse_git_log(std::string_view raw, const AliasMap& aliases) {
    std::vector<CommitRecord> commits;
    std::size_t pos = raw.find('\x1e');
    while (pos != std::string_view::npos) {
        const std::size_t next = raw.find('\x1e', pos + 1);
        std::string_view record = raw.substr(pos + 1, next == std::string_view::npos ? std::string_view::npos : next - pos - 1);
        pos = next;

        std::array<std::string_view, 5> fields;
        for (auto& f : fields) {
            const std::size_t sep = record.find('\x1f');
            if (sep == std::string_view::npos) throw ParseError("truncated git log record", commits.size() + 1);
            f = record.substr(0, sep);
            record.remove_prefix(sep + 1);
        }

        CommitRecord commit;
        commit.id = std::string(fields[0]);
        commit.author = normalize_identity(fields[1], aliases);
        try {
            commit.timestamp = std::stoll(std::string(fields[2]));
        } catch (const std::exception&) {
            throw ParseError("bad timestamp in commit " + commit.id, commits.size() + 1);
        }
        std::string_view body = fields[4];
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.remove_suffix(1);
        commit.message = std::string(body);

        FileChange* current = nullptr;
        std::int64_t next_line = 0;
        while (!record.empty()) {
            const std::size_t nl = record.find('\n');
            const std::string_view line = record.substr(0, nl);
            record = nl == std::string_view::npos ? std::string_view{} : record.substr(nl + 1);

            if (starts_with(line, "diff --git ")) {
                commit.changes.emplace_back();
                current = &commit.changes.back();
                const std::size_t b = line.rfind(" b/");
                current->path = b == std::string_view::npos ? std::string(line.substr(11)) : strip_path_quotes(line.substr(b + 3));
                next_line = 0;
            } else if (!current) {
                continue;
            } else if (starts_with(line, "+++ ")) {
                const std::string_view p = line.substr(4);
                if (p != "/dev/null") current->path = strip_path_quotes(starts_with(p, "b/") ? p.substr(2) : p);
            } else if (starts_with(line, "--- ")) {
                const std::string_view p = line.substr(4);
                if (p != "/dev/null") current->path = strip_path_quotes(starts_with(p, "a/") ? p.substr(2) : p);
            } else if (starts_with(line, "@@")) {
                next_line = hunk_new_start(line);
            } else if (next_line > 0 && starts_with(line, "+")) {
                ++current->lines_added;
                current->modified_lines.push_back(next_line++);
            } else if (next_line > 0 && starts_with(line, "-")) {
                ++current->lines_deleted;
            }
        }
        for (auto& c : commit.changes) canonicalize(c.modified_lines);
        if (commit.changes.empty()) continue;  // empty commits and diff-less merges
        commits.push_back(std::move(commit));
    }
    return commits;
}

std::vector<MonthCount> commit_months(std::span<const CommitRecord> commits) {
    using namespace std::chrono;
    if (commits.empty()) return {};
    auto month_index = [](std::int64_t ts) {
        const year_month_day ymd{floor<days>(sys_seconds{seconds{ts}})};
        return static_cast<std::int64_t>(static_cast<int>(ymd.year())) * 12 + (static_cast<unsigned>(ymd.month()) - 1);
    };
    const auto [lo, hi] = std::minmax_element(commits.begin(), commits.end(),
                                              [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    const std::int64_t first = month_index(lo->timestamp);
    const std::int64_t last = month_index(hi->timestamp);
    std::vector<MonthCount> months;
    for (std::int64_t m = first; m <= last; ++m)
        months.push_back({static_cast<int>(m / 12), static_cast<unsigned>(m % 12) + 1, 0});
    for (const auto& c : commits) ++months[static_cast<std::size_t>(month_index(c.timestamp) - first)].commits;
    return months;
}

RepositorySummary ingest_repository(const std::filesystem::path& source, const IngestOptions& options) {
    std::error_code ec;
    if (!std::filesystem::exists(source, ec)) throw IngestError("source does not exist: " + source.string());

    RepositorySummary summary;
    summary.repo_id = source.filename().empty() ? source.parent_path().filename().string() : source.filename().string();

    if (options.format == SourceFormat::jsonl) {
        summary.commits = parse_log_export(io::read_text(source), options.aliases);
        std::set<std::string> paths;
        for (const auto& c : summary.commits)
            for (const auto& f : c.changes) paths.insert(f.path);
        summary.total_files = paths.size();
        summary.iac_files = static_cast<std::size_t>(std::count_if(paths.begin(), paths.end(), options.filter));
    } else {
        if (!std::filesystem::is_directory(source)) throw IngestError("git source must be a directory: " + source.string());
        run_command("git --version >/dev/null 2>&1");
        const std::string repo = shell_quote(source.string());
        const std::string head = run_command("git -C " + repo + " rev-parse --verify -q HEAD 2>/dev/null || true");
        if (!head.empty()) {
            const std::string log = run_command(
                "git -C " + repo +
                " -c core.quotepath=false log --reverse --first-parent -m --no-renames --no-color --no-ext-diff"
                " --unified=0 -p --format='%x1e%H%x1f%ae%x1f%at%x1f%P%x1f%B%x1f'");
            summary.commits = parse_git_log(log, options.aliases);
            const std::string files = run_command("git -C " + repo + " -c core.quotepath=false ls-files");
            std::istringstream lines(files);
            for (std::string f; std::getline(lines, f);) {
                if (f.empty()) continue;
                ++summary.total_files;
                if (options.filter(f)) ++summary.iac_files;
            }
        }
    }
    summary.commit_months = commit_months(summary.commits);
    return summary;
}

CriteriaVerdict apply_selection_criteria(const RepositorySummary& summary) {
    CriteriaVerdict v;
    v.available = true;
    if (summary.total_files == 0) {
        v.zero_denominator = true;
        v.iac_share_pass = false;
    } else {
        v.iac_share = static_cast<double>(summary.iac_files) / static_cast<double>(summary.total_files);
        v.iac_share_pass = v.iac_share >= kMinIacShare;
    }
    std::vector<std::size_t> counts;
    for (const auto& m : summary.commit_months) counts.push_back(m.commits);
    if (!counts.empty()) {
        std::sort(counts.begin(), counts.end());
        const std::size_t n = counts.size();
        v.median_monthly_commits = n % 2 ? static_cast<double>(counts[n / 2])
                                         : (static_cast<double>(counts[n / 2 - 1]) + static_cast<double>(counts[n / 2])) / 2.0;
    }
    v.activity_pass = v.median_monthly_commits >= kMinMedianMonthlyCommits;
    v.final = v.available && v.iac_share_pass && v.activity_pass;
    return v;
}

}  // namespace devminer::history
