#include "devminer/labeling.hpp"

#include "devminer/csv.hpp"
#include "devminer/error.hpp"
#include "devminer/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace devminer::labeling {
namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool contains_word(std::string_view text, std::string_view word) {
    if (word.empty()) return false;
    for (std::size_t pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
        const bool left = pos == 0 || !is_word_char(text[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right = end == text.size() || !is_word_char(text[end]);
        if (left && right) return true;
    }
    return false;
}

std::optional<bool> parse_vote(const std::string& raw, std::size_t row, const char* column) {
    const std::string v = lowercase(raw);
    if (v.empty()) return std::nullopt;
    if (v == "yes") return true;
    if (v == "no") return false;
    throw ParseError(std::string("column ") + column + ": expected yes, no or empty, got '" + raw + "'", row);
}

}  // namespace

IssueStore IssueStore::load(const std::filesystem::path& file) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_text(file));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("issue store: ") + e.what(), 1);
    }
    if (!doc.is_object()) throw ParseError("issue store must be a JSON object", 1);
    std::map<std::string, std::string> summaries;
    for (const auto& [id, summary] : doc.items()) {
        if (!summary.is_string()) throw ParseError("issue " + id + ": summary is not a string", 1);
        summaries[id] = summary.get<std::string>();
    }
    return IssueStore(std::move(summaries));
}

std::optional<std::string> IssueStore::summary(const std::string& id) const {
    const auto it = summaries_.find(id);
    if (it == summaries_.end()) return std::nullopt;
    return it->second;
}

std::vector<IssuePattern> default_issue_patterns() {
    return {
        {R"(#(\d+))", false},
        {R"(\b([A-Z]+-\d+)\b)", false},
        {R"(bug[ :#]*(\d+))", true},
    };
}

ExtendedCommitMessage build_ecm(const CommitRecord& commit, const IssueStore& issues,
                                const std::vector<IssuePattern>& patterns) {
    ExtendedCommitMessage ecm;
    ecm.commit_id = commit.id;
    ecm.text = commit.message;

    std::vector<std::pair<std::size_t, std::string>> found;
    for (const auto& p : patterns) {
        auto flags = std::regex::ECMAScript;
        if (p.case_insensitive) flags |= std::regex::icase;
        const std::regex re(p.source, flags);
        for (auto it = std::sregex_iterator(commit.message.begin(), commit.message.end(), re); it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            const bool has_group = m.size() > 1 && m[1].matched;
            found.emplace_back(static_cast<std::size_t>(has_group ? m.position(1) : m.position(0)), has_group ? m[1].str() : m[0].str());
        }
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::set<std::string> seen;
    for (auto& [pos, id] : found) {
        if (!seen.insert(id).second) continue;
        ecm.issue_ids.push_back(id);
        if (auto summary = issues.summary(id)) {
            ecm.text += '\n';
            ecm.text += *summary;
        }
    }
    return ecm;
}

Ruleset Ruleset::defaults() {
    return {{"bug", "fix", "fixes", "fixed", "defect", "error", "fail", "failure", "crash", "wrong", "incorrect", "fault",
             "patch", "revert"},
            {}};
}

Ruleset Ruleset::load(const std::filesystem::path& file) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_text(file));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("ruleset: ") + e.what(), 1);
    }
    Ruleset rules = defaults();
    auto read_list = [&](const char* key, std::vector<std::string>& out) {
        if (!doc.contains(key)) return;
        if (!doc[key].is_array()) throw ParseError(std::string("ruleset: '") + key + "' must be an array", 1);
        out.clear();
        for (const auto& v : doc[key]) out.push_back(v.get<std::string>());
    };
    read_list("keywords", rules.keywords);
    read_list("negations", rules.negations);
    if (rules.keywords.empty()) throw ArgumentError("ruleset has no keywords");
    return rules;
}

DefectLabel classify_ecm(const ExtendedCommitMessage& ecm, const Ruleset& rules) {
    if (rules.keywords.empty()) throw ArgumentError("ruleset has no keywords");
    std::string text = lowercase(ecm.text);
    for (const auto& phrase : rules.negations) {
        const std::string p = lowercase(phrase);
        if (p.empty()) continue;
        for (std::size_t pos = text.find(p); pos != std::string::npos; pos = text.find(p, pos + 1)) text.replace(pos, p.size(), " ");
    }
    DefectLabel label;
    label.commit_id = ecm.commit_id;
    label.source = LabelSource::heuristic;
    for (const auto& kw : rules.keywords) {
        if (contains_word(text, lowercase(kw))) label.matched_keywords.push_back(kw);
    }
    label.is_defect_related = !label.matched_keywords.empty();
    return label;
}

std::vector<DefectLabel> import_labels(std::string_view csv_text) {
    const auto rows = csv::parse(csv_text);
    if (rows.empty()) throw ParseError("label CSV is empty", 1);
    const csv::Row expected{"commit_id", "rater_1", "rater_2", "resolver"};
    csv::Row header = rows.front();
    for (auto& h : header) h = lowercase(h);
    if (header != expected) throw ParseError("label CSV header must be commit_id,rater_1,rater_2,resolver", 1);

    std::vector<DefectLabel> labels;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::size_t row_no = r + 1;
        const auto& row = rows[r];
        if (row.size() != 4) throw ParseError("expected 4 columns, got " + std::to_string(row.size()), row_no);
        if (row[0].empty()) throw ParseError("empty commit_id", row_no);

        DefectLabel label;
        label.commit_id = row[0];
        label.source = LabelSource::imported;
        const auto r1 = parse_vote(row[1], row_no, "rater_1");
        const auto r2 = parse_vote(row[2], row_no, "rater_2");
        label.resolver = parse_vote(row[3], row_no, "resolver");
        label.rater_votes = {r1, r2};

        if (label.resolver) {
            label.is_defect_related = *label.resolver;
        } else if (r1 && r2 && *r1 == *r2) {
            label.is_defect_related = *r1;
        } else {
            throw DataError("row " + std::to_string(row_no) + ": commit " + label.commit_id +
                            " is unresolved (raters disagree or are missing and no resolver verdict)");
        }

        if (const auto it = index.find(label.commit_id); it != index.end()) {
            if (labels[it->second].is_defect_related != label.is_defect_related)
                throw DataError("row " + std::to_string(row_no) + ": conflicting duplicate label for commit " + label.commit_id);
            continue;
        }
        index.emplace(label.commit_id, labels.size());
        labels.push_back(std::move(label));
    }
    return labels;
}

std::vector<DefectLabel> import_labels_file(const std::filesystem::path& file) { return import_labels(io::read_text(file)); }

double cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a.size() != b.size()) throw ArgumentError("cohens_kappa: rating lists differ in length");
    if (a.empty()) throw ArgumentError("cohens_kappa: no ratings");
    const double n = static_cast<double>(a.size());
    double agree = 0, a_yes = 0, b_yes = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += a[i] == b[i];
        a_yes += a[i];
        b_yes += b[i];
    }
    const double p_o = agree / n;
    const double p_e = (a_yes / n) * (b_yes / n) + (1 - a_yes / n) * (1 - b_yes / n);
    if (p_e >= 1.0) return 1.0;  // both raters constant and identical
    return (p_o - p_e) / (1 - p_e);
}

std::vector<ScriptClass> label_scripts(std::span<const DefectLabel> labels, std::span<const CommitRecord> commits,
                                       const std::function<bool(std::string_view)>& include) {
    std::map<std::string, const CommitRecord*> by_id;
    for (const auto& c : commits) by_id.emplace(c.id, &c);

    std::map<std::string, bool> scripts;
    for (const auto& c : commits)
        for (const auto& f : c.changes)
            if (!include || include(f.path)) scripts.emplace(f.path, false);

    for (const auto& label : labels) {
        const auto it = by_id.find(label.commit_id);
        if (it == by_id.end()) throw DataError("label references unknown commit " + label.commit_id);
        if (!label.is_defect_related) continue;
        for (const auto& f : it->second->changes) {
            if (auto s = scripts.find(f.path); s != scripts.end()) s->second = true;
        }
    }
    std::vector<ScriptClass> out;
    out.reserve(scripts.size());
    for (const auto& [path, defective] : scripts) out.push_back({path, defective});
    return out;
}

std::vector<DefectLabel> label_commits(std::span<const CommitRecord> commits, const IssueStore& issues,
                                       const Ruleset& rules, std::span<const DefectLabel> imported) {
    std::map<std::string, const DefectLabel*> overrides;
    for (const auto& l : imported) overrides.emplace(l.commit_id, &l);
    std::vector<DefectLabel> labels;
    labels.reserve(commits.size());
    for (const auto& c : commits) {
        if (const auto it = overrides.find(c.id); it != overrides.end()) {
            labels.push_back(*it->second);
        } else {
            labels.push_back(classify_ecm(build_ecm(c, issues), rules));
        }
    }
    return labels;
}

std::string to_jsonl_line(const DefectLabel& label) {
    nlohmann::ordered_json obj;
    obj["id"] = label.commit_id;
    obj["defect"] = label.is_defect_related;
    obj["source"] = label.source == LabelSource::heuristic ? "heuristic" : "imported";
    if (label.source == LabelSource::heuristic) {
        obj["keywords"] = label.matched_keywords;
    } else {
        nlohmann::ordered_json votes = nlohmann::ordered_json::array();
        for (const auto& v : label.rater_votes) votes.push_back(v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json());
        obj["votes"] = votes;
        obj["resolver"] = label.resolver ? nlohmann::ordered_json(*label.resolver) : nlohmann::ordered_json();
    }
    return obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<DefectLabel> parse_labels_jsonl(std::string_view text) {
    std::vector<DefectLabel> labels;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            DefectLabel l;
            l.commit_id = obj.at("id").get<std::string>();
            l.is_defect_related = obj.at("defect").get<bool>();
            const auto source = obj.at("source").get<std::string>();
            if (source == "heuristic") {
                l.source = LabelSource::heuristic;
                if (obj.contains("keywords")) l.matched_keywords = obj["keywords"].get<std::vector<std::string>>();
            } else if (source == "imported") {
                l.source = LabelSource::imported;
                if (obj.contains("votes"))
                    for (const auto& v : obj["votes"]) l.rater_votes.push_back(v.is_null() ? std::nullopt : std::optional<bool>(v.get<bool>()));
                if (obj.contains("resolver") && !obj["resolver"].is_null()) l.resolver = obj["resolver"].get<bool>();
            } else {
                throw ParseError("unknown label source '" + source + "'", line_no);
            }
            labels.push_back(std::move(l));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid label record: ") + e.what(), line_no);
        }
    }
    return labels;
}

}  // namespace devminer::labeling
