#include "devminer/metrics.hpp"

#include "devminer/csv.hpp"
#include "devminer/error.hpp"
#include "devminer/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace devminer::metrics {
namespace {

void merge_change(history::FileChange& into, const history::FileChange& from) {
    into.lines_added += from.lines_added;
    into.lines_deleted += from.lines_deleted;
    std::vector<std::int64_t> merged;
    std::set_union(into.modified_lines.begin(), into.modified_lines.end(), from.modified_lines.begin(),
                   from.modified_lines.end(), std::back_inserter(merged));
    into.modified_lines = std::move(merged);
}

void sort_commits(ScriptHistory& h) {
    std::sort(h.commits.begin(), h.commits.end(), [](const ScriptCommit& a, const ScriptCommit& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.commit_id < b.commit_id;
    });
}

void append(ScriptHistory& h, const CommitRecord& c, const history::FileChange& f) {
    if (!h.commits.empty() && h.commits.back().commit_id == c.id) {
        merge_change(h.commits.back().change, f);
        return;
    }
    h.commits.push_back({c.id, c.author, c.timestamp, f});
}

double parse_number(const std::string& field, std::size_t row, const char* column) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("column ") + column + ": not a number '" + field + "'", row);
    }
}

}  // namespace

ScriptHistory make_history(const std::string& script, std::span<const CommitRecord> commits) {
    ScriptHistory h;
    h.script_path = script;
    for (const auto& c : commits)
        for (const auto& f : c.changes)
            if (f.path == script) append(h, c, f);
    sort_commits(h);
    return h;
}

std::map<std::string, ScriptHistory> script_histories(std::span<const CommitRecord> commits,
                                                      const std::function<bool(std::string_view)>& include) {
    std::map<std::string, ScriptHistory> out;
    for (const auto& c : commits)
        for (const auto& f : c.changes) {
            if (include && !include(f.path)) continue;
            auto& h = out[f.path];
            h.script_path = f.path;
            append(h, c, f);
        }
    for (auto& [_, h] : out) sort_commits(h);
    return out;
}

LineAttribution attribute_lines(const ScriptHistory& history) {
    LineAttribution attr;
    attr.script_path = history.script_path;
    std::vector<std::string>& lines = attr.per_line_author;

    for (const auto& commit : history.commits) {
        const auto& change = commit.change;
        const auto old_len = static_cast<std::int64_t>(lines.size());
        const std::int64_t new_len = old_len + change.lines_added - change.lines_deleted;
        if (new_len < 0)
            throw ReplayError(commit.commit_id, "deletes " + std::to_string(change.lines_deleted) + " lines from a " +
                                                    std::to_string(old_len) + "-line " + history.script_path);
        const auto& touched = change.modified_lines;
        if (!touched.empty() && touched.back() > new_len)
            throw ReplayError(commit.commit_id, "line " + std::to_string(touched.back()) + " exceeds tracked length " +
                                                    std::to_string(new_len) + " of " + history.script_path);
        const std::int64_t survivors = new_len - static_cast<std::int64_t>(touched.size());
        if (survivors > old_len)
            throw ReplayError(commit.commit_id, "hunk line numbers do not account for " +
                                                    std::to_string(survivors - old_len) + " added lines of " +
                                                    history.script_path);
        std::int64_t to_remove = old_len - survivors;

        std::vector<std::string> next;
        next.reserve(static_cast<std::size_t>(new_len));
        std::size_t old_pos = 0;
        std::size_t t = 0;
        for (std::int64_t line = 1; line <= new_len; ++line) {
            if (t < touched.size() && touched[t] == line) {
                ++t;
                if (to_remove > 0) {
                    ++old_pos;
                    --to_remove;
                }
                next.push_back(commit.author);
            } else {
                next.push_back(lines[old_pos++]);
            }
        }
        lines = std::move(next);
    }
    return attr;
}

std::map<std::string, std::size_t> ownership(const LineAttribution& attr) {
    std::map<std::string, std::size_t> counts;
    for (const auto& a : attr.per_line_author) ++counts[a];
    return counts;
}

double highest_contrib_code(const LineAttribution& attr) {
    if (attr.per_line_author.empty()) throw UndefinedMetricError("highest contributor's code undefined for empty " + attr.script_path);
    std::size_t best = 0;
    for (const auto& [_, n] : ownership(attr)) best = std::max(best, n);
    return static_cast<double>(best) / static_cast<double>(attr.per_line_author.size());
}

std::size_t minor_contributors(const LineAttribution& attr, const ScriptHistory& history) {
    if (attr.per_line_author.empty()) throw UndefinedMetricError("minor contributors undefined for empty " + attr.script_path);
    const auto owned = ownership(attr);
    const std::size_t total = attr.per_line_author.size();
    std::set<std::string> authors;
    for (const auto& c : history.commits) authors.insert(c.author);
    std::size_t minors = 0;
    for (const auto& a : authors) {
        const auto it = owned.find(a);
        const std::size_t lines = it == owned.end() ? 0 : it->second;
        // lines / total <= 0.05, kept in integers
        if (lines * 20 <= total) ++minors;
    }
    return minors;
}

std::size_t developer_count(const ScriptHistory& history) {
    std::set<std::string> authors;
    for (const auto& c : history.commits) authors.insert(c.author);
    return authors.size();
}

double norm_commit_size(const ScriptHistory& history) {
    if (history.commits.empty()) throw UndefinedMetricError("no commits for " + history.script_path);
    std::int64_t churn = 0;
    for (const auto& c : history.commits) churn += c.change.lines_added + c.change.lines_deleted;
    return static_cast<double>(churn) / static_cast<double>(history.commits.size());
}

double scatteredness(const ScriptHistory& history) {
    if (history.commits.empty()) throw UndefinedMetricError("no commits for " + history.script_path);
    std::map<std::int64_t, std::size_t> times_modified;
    for (const auto& c : history.commits)
        for (std::int64_t line : c.change.modified_lines) ++times_modified[line];
    const double n = static_cast<double>(history.commits.size());
    double entropy = 0.0;
    for (const auto& [_, k] : times_modified) {
        const double x = static_cast<double>(k) / n;
        if (x > 0.0 && x < 1.0) entropy -= x * std::log2(x);
    }
    return entropy;
}

double unfocused_contribution(const net::ContributionNetwork& net, const std::string& script) {
    return net::betweenness_centrality(net, script);
}

double disjointness(const net::DeveloperNetwork& net, const std::map<net::Edge, double>& betweenness,
                    const std::string& script) {
    return net::max_edge_betweenness_for_script(net, betweenness, script);
}

SizeAge size_and_age(const ScriptHistory& history, const LineAttribution& attr) {
    if (history.commits.empty()) throw UndefinedMetricError("no commits for " + history.script_path);
    const auto [lo, hi] = std::minmax_element(history.commits.begin(), history.commits.end(),
                                              [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    return {attr.per_line_author.size(), static_cast<double>(hi->timestamp - lo->timestamp) / kSecondsPerMonth};
}

std::vector<MetricVector> metric_table(const Dataset& dataset, const MetricOptions& options) {
    std::set<std::string> scripts;
    for (const auto& s : dataset.scripts) scripts.insert(s.script_path);
    if (scripts.empty()) return {};

    const auto histories = script_histories(dataset.commits, [&](std::string_view p) { return scripts.contains(std::string(p)); });
    const auto dev_net = net::build_developer_network(dataset.commits, scripts);
    const auto edge_btw = net::edge_betweenness(dev_net, options.normalize_edge_betweenness);
    const auto contrib_net = net::build_contribution_network(dataset.commits, scripts);
    const auto centrality = net::betweenness_centrality_all(contrib_net);

    std::vector<MetricVector> table;
    for (const auto& cls : dataset.scripts) {
        const auto h = histories.find(cls.script_path);
        if (h == histories.end()) continue;  // no commits
        const ScriptHistory& history = h->second;
        const LineAttribution attr = attribute_lines(history);

        MetricVector row;
        row.script_path = cls.script_path;
        row.is_defective = cls.is_defective;
        row.developer_count = developer_count(history);
        row.disjointness = disjointness(dev_net, edge_btw, cls.script_path);
        if (!attr.per_line_author.empty()) {
            row.highest_contrib_code = highest_contrib_code(attr);
            row.minor_contributors = minor_contributors(attr, history);
        }
        row.norm_commit_size = norm_commit_size(history);
        row.scatteredness = scatteredness(history);
        row.unfocused_contribution = centrality.at(cls.script_path);
        const SizeAge sa = size_and_age(history, attr);
        row.size_loc = sa.size_loc;
        row.age_months = sa.age_months;
        table.push_back(std::move(row));
    }
    return table;
}

const std::vector<std::string>& activity_metric_names() {
    static const std::vector<std::string> names{"developers",       "disjointness",  "highest_contrib", "minors",
                                                "norm_commit_size", "scatteredness", "unfocused"};
    return names;
}

std::optional<double> metric_value(const MetricVector& row, const std::string& name) {
    if (name == "developers") return static_cast<double>(row.developer_count);
    if (name == "disjointness") return row.disjointness;
    if (name == "highest_contrib") return row.highest_contrib_code;
    if (name == "minors") {
        if (!row.minor_contributors) return std::nullopt;
        return static_cast<double>(*row.minor_contributors);
    }
    if (name == "norm_commit_size") return row.norm_commit_size;
    if (name == "scatteredness") return row.scatteredness;
    if (name == "unfocused") return row.unfocused_contribution;
    if (name == "size_loc") return static_cast<double>(row.size_loc);
    if (name == "age_months") return row.age_months;
    throw ArgumentError("unknown metric " + name);
}

namespace {
const csv::Row kHeader{"script", "developers", "disjointness", "highest_contrib", "minors", "norm_commit_size",
                       "scatteredness", "unfocused", "size_loc", "age_months", "defective"};
}

void write_metric_csv(std::ostream& out, std::span<const MetricVector> table) {
    csv::write_row(out, kHeader);
    for (const auto& r : table) {
        csv::write_row(out, {r.script_path, csv::fixed6(static_cast<double>(r.developer_count)), csv::fixed6(r.disjointness),
                             r.highest_contrib_code ? csv::fixed6(*r.highest_contrib_code) : "",
                             r.minor_contributors ? csv::fixed6(static_cast<double>(*r.minor_contributors)) : "",
                             csv::fixed6(r.norm_commit_size), csv::fixed6(r.scatteredness),
                             csv::fixed6(r.unfocused_contribution), csv::fixed6(static_cast<double>(r.size_loc)),
                             csv::fixed6(r.age_months), r.is_defective ? "1" : "0"});
    }
}

std::vector<MetricVector> parse_metric_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front() != kHeader) throw ParseError("metric table header mismatch", 1);
    std::vector<MetricVector> table;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::size_t line = i + 1;
        if (row.size() != kHeader.size()) throw ParseError("expected " + std::to_string(kHeader.size()) + " columns", line);
        MetricVector m;
        m.script_path = row[0];
        m.developer_count = static_cast<std::size_t>(std::llround(parse_number(row[1], line, "developers")));
        m.disjointness = parse_number(row[2], line, "disjointness");
        if (!row[3].empty()) m.highest_contrib_code = parse_number(row[3], line, "highest_contrib");
        if (!row[4].empty()) m.minor_contributors = static_cast<std::size_t>(std::llround(parse_number(row[4], line, "minors")));
        m.norm_commit_size = parse_number(row[5], line, "norm_commit_size");
        m.scatteredness = parse_number(row[6], line, "scatteredness");
        m.unfocused_contribution = parse_number(row[7], line, "unfocused");
        m.size_loc = static_cast<std::size_t>(std::llround(parse_number(row[8], line, "size_loc")));
        m.age_months = parse_number(row[9], line, "age_months");
        if (row[10] != "0" && row[10] != "1") throw ParseError("column defective: expected 0 or 1", line);
        m.is_defective = row[10] == "1";
        table.push_back(std::move(m));
    }
    return table;
}

std::vector<MetricVector> read_metric_csv(const std::string& path) { return parse_metric_csv(io::read_text(path)); }

}  // namespace devminer::metrics
