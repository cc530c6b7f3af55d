#include "devminer/report.hpp"

#include "devminer/csv.hpp"
#include "devminer/error.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>

namespace devminer::report {

stats::Direction expected_direction(std::string_view metric) {
    return metric == "highest_contrib" ? stats::Direction::neutral_greater : stats::Direction::defective_greater;
}

Analysis analyze_metrics(std::span<const metrics::MetricVector> table) {
    Analysis a;
    for (const auto& row : table) (row.is_defective ? a.n_defective : a.n_neutral)++;
    for (const auto& name : metrics::activity_metric_names()) {
        std::vector<double> defective, neutral, value, size, age;
        std::vector<char> labels;
        for (const auto& row : table) {
            const auto v = metrics::metric_value(row, name);
            if (!v) continue;
            (row.is_defective ? defective : neutral).push_back(*v);
            value.push_back(*v);
            size.push_back(static_cast<double>(row.size_loc));
            age.push_back(row.age_months);
            labels.push_back(row.is_defective ? 1 : 0);
        }
        if (defective.empty() || neutral.empty())
            throw DataError("metric " + name + ": both defective and neutral scripts are required");
        MetricAnalysis m;
        m.metric = name;
        m.test = stats::mann_whitney_one_sided(defective, neutral, expected_direction(name), name);
        m.effect = stats::cliffs_delta(defective, neutral, name);
        // std::vector<bool> is not contiguous
        const auto flags = std::make_unique<bool[]>(labels.size());
        std::copy(labels.begin(), labels.end(), flags.get());
        try {
            m.omanova = stats::omanova(value, size, age, std::span<const bool>(flags.get(), labels.size()), name);
        } catch (const Error& e) {
            m.omanova_error = e.what();
        }
        a.metrics.push_back(std::move(m));
    }
    return a;
}

namespace {

Json response_json(const stats::ResponseTest& r) {
    return Json{{"f", r.f_statistic}, {"p", r.p_value}, {"transformed", r.transformed}};
}

}  // namespace

Json analysis_to_json(const Analysis& analysis) {
    Json out;
    out["alpha"] = stats::kAlpha;
    out["n_defective"] = analysis.n_defective;
    out["n_neutral"] = analysis.n_neutral;
    Json list = Json::array();
    for (const auto& m : analysis.metrics) {
        Json j;
        j["metric"] = m.metric;
        j["direction"] = std::string(stats::to_string(m.test.direction));
        j["mann_whitney"] = {{"u", m.test.u_statistic},
                             {"p", m.test.p_value},
                             {"significant", m.test.significant},
                             {"exact", m.test.exact},
                             {"n_defective", m.test.n_defective},
                             {"n_neutral", m.test.n_neutral}};
        j["cliffs_delta"] = {{"delta", m.effect.delta}, {"magnitude", std::string(stats::to_string(m.effect.magnitude))}};
        if (m.omanova) {
            j["omanova"] = {{"size", response_json(m.omanova->size)},
                            {"age", response_json(m.omanova->age)},
                            {"metric", response_json(m.omanova->metric)},
                            {"pillai_trace", m.omanova->pillai_trace},
                            {"pillai_p", m.omanova->pillai_p}};
        } else {
            j["omanova_error"] = m.omanova_error;
        }
        list.push_back(std::move(j));
    }
    out["metrics"] = std::move(list);
    return out;
}

std::vector<SurveyRow> parse_survey_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    const csv::Row header{"respondent", "metric", "likert"};
    if (rows.empty() || rows.front() != header) throw ParseError("survey header must be respondent,metric,likert", 1);
    std::vector<SurveyRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 3) throw ParseError("expected 3 columns", i + 1);
        if (r[2].size() != 1 || r[2][0] < '1' || r[2][0] > '5') throw ParseError("likert must be 1..5", i + 1);
        out.push_back({r[0], r[1], r[2][0] - '0'});
    }
    return out;
}

std::vector<SurveyTally> tally_survey(std::span<const SurveyRow> rows) {
    std::vector<SurveyTally> out;
    std::map<std::string, std::size_t> index;
    for (const auto& r : rows) {
        auto [it, inserted] = index.try_emplace(r.metric, out.size());
        if (inserted) out.push_back({r.metric, 0, 0, 0.0});
        auto& t = out[it->second];
        ++t.responses;
        if (r.likert >= 4) ++t.agree;
    }
    for (auto& t : out) t.percent_agree = 100.0 * static_cast<double>(t.agree) / static_cast<double>(t.responses);
    return out;
}

namespace {

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::string num(const Json& v, const char* format = "%.6f") {
    if (!v.is_number()) return "n/a";
    return fmt(format, v.get<double>());
}

constexpr const char* kHeuristicNote =
    "silos and unfocused cut-offs are dataset-relative quantiles (a heuristic), not established thresholds";

Json build_json(const ReportInputs& in) {
    Json out;
    if (in.stats != nullptr) out["statistics"] = *in.stats;

    Json ap;
    ap["thresholds"] = {{"max_developers", in.thresholds.max_developers},
                        {"max_minors", in.thresholds.max_minors},
                        {"min_highest_contrib", in.thresholds.min_highest_contrib},
                        {"disjointness_quantile", in.thresholds.disjointness_quantile},
                        {"unfocused_quantile", in.thresholds.unfocused_quantile}};
    for (const auto& f : in.flags) {
        if (f.pattern == antipatterns::Pattern::silos) ap["thresholds"]["silos_cut"] = f.threshold;
        if (f.pattern == antipatterns::Pattern::unfocused) ap["thresholds"]["unfocused_cut"] = f.threshold;
    }
    ap["note"] = kHeuristicNote;
    Json triggered = Json::array();
    std::map<std::string, bool> scripts, flagged;
    for (const auto& f : in.flags) {
        scripts[f.script_path] = true;
        if (!f.triggered) continue;
        flagged[f.script_path] = true;
        triggered.push_back({{"script", f.script_path},
                             {"pattern", std::string(antipatterns::to_string(f.pattern))},
                             {"value", *f.value},
                             {"threshold", f.threshold},
                             {"dataset_relative", f.dataset_relative}});
    }
    ap["scripts"] = scripts.size();
    ap["scripts_flagged"] = flagged.size();
    ap["flags"] = std::move(triggered);
    out["antipatterns"] = std::move(ap);

    if (in.evaluation != nullptr) {
        Json cells = Json::array();
        for (const auto& [set, learners] : in.evaluation->items())
            for (const auto& [learner, cell] : learners.items())
                cells.push_back({{"feature_set", set}, {"learner", learner}, {"median", cell.at("median")}, {"sk_rank", cell.at("sk_rank")}});
        out["prediction"] = std::move(cells);
    }
    if (!in.survey.empty()) {
        Json s = Json::array();
        for (const auto& t : in.survey)
            s.push_back({{"metric", t.metric}, {"responses", t.responses}, {"agree", t.agree}, {"percent_agree", t.percent_agree}});
        out["survey"] = std::move(s);
    }
    return out;
}

std::string build_text(const Json& j) {
    std::ostringstream out;
    out << "devminer report\n===============\n";
    if (j.contains("statistics")) {
        const auto& s = j["statistics"];
        out << "\nStatistical tests (defective n=" << s.value("n_defective", 0) << ", neutral n=" << s.value("n_neutral", 0)
            << ", alpha " << num(s["alpha"], "%.2f") << ")\n";
        out << fmt("%-18s %-18s %10s %4s %8s %-10s %12s\n", "metric", "direction", "p-value", "sig", "delta", "magnitude",
                   "omanova-p");
        for (const auto& m : s["metrics"]) {
            const std::string om = m.contains("omanova") ? num(m["omanova"]["metric"]["p"], "%.6g") : "degenerate";
            out << fmt("%-18s %-18s %10s %4s %8s %-10s %12s\n", m["metric"].get<std::string>().c_str(),
                       m["direction"].get<std::string>().c_str(), num(m["mann_whitney"]["p"], "%.6g").c_str(),
                       m["mann_whitney"]["significant"].get<bool>() ? "yes" : "no",
                       num(m["cliffs_delta"]["delta"], "%.3f").c_str(),
                       m["cliffs_delta"]["magnitude"].get<std::string>().c_str(), om.c_str());
        }
    }

    const auto& ap = j["antipatterns"];
    const auto& t = ap["thresholds"];
    out << "\nAnti-patterns\n";
    out << "  many_cooks: developers > " << num(t["max_developers"], "%g") << "\n";
    out << "  minors_spoilers: minor contributors > " << num(t["max_minors"], "%g") << "\n";
    out << "  boss_not_around: highest contributor share < " << num(t["min_highest_contrib"], "%g") << "\n";
    out << "  silos: disjointness > " << (t.contains("silos_cut") ? num(t["silos_cut"]) : "n/a") << " (quantile "
        << num(t["disjointness_quantile"], "%g") << ")\n";
    out << "  unfocused: unfocused contribution > " << (t.contains("unfocused_cut") ? num(t["unfocused_cut"]) : "n/a")
        << " (quantile " << num(t["unfocused_quantile"], "%g") << ")\n";
    out << "  note: " << ap["note"].get<std::string>() << "\n";
    if (ap["flags"].empty()) {
        out << "  no anti-patterns triggered\n";
    } else {
        out << "  scripts flagged: " << ap["scripts_flagged"].get<std::size_t>() << " of " << ap["scripts"].get<std::size_t>() << "\n";
        std::string current;
        for (const auto& f : ap["flags"]) {
            const auto script = f["script"].get<std::string>();
            if (script != current) {
                out << (current.empty() ? "" : "\n") << "  " << script << ":";
                current = script;
            } else {
                out << ",";
            }
            out << " " << f["pattern"].get<std::string>() << " (" << num(f["value"], "%g") << ")";
        }
        out << "\n";
    }

    if (j.contains("prediction")) {
        out << "\nPrediction (median over folds, Scott-Knott rank in brackets)\n";
        out << fmt("%-12s %-8s %14s %14s %14s\n", "features", "learner", "precision", "recall", "f1");
        for (const auto& c : j["prediction"]) {
            auto cell = [&](const char* m) { return num(c["median"][m], "%.3f") + " [" + std::to_string(c["sk_rank"][m].get<int>()) + "]"; };
            out << fmt("%-12s %-8s %14s %14s %14s\n", c["feature_set"].get<std::string>().c_str(),
                       c["learner"].get<std::string>().c_str(), cell("precision").c_str(), cell("recall").c_str(),
                       cell("f1").c_str());
        }
    }

    if (j.contains("survey")) {
        out << "\nSurvey (share answering agree or strongly agree)\n";
        for (const auto& s : j["survey"]) {
            const double pct = s["percent_agree"].get<double>();
            const auto filled = static_cast<std::size_t>(std::lround(pct / 5.0));
            out << fmt("  %-18s %s%s %5.1f%% (n=%zu)\n", s["metric"].get<std::string>().c_str(), std::string(filled, '#').c_str(),
                       std::string(20 - filled, '.').c_str(), pct, s["responses"].get<std::size_t>());
        }
    }
    return out.str();
}

}  // namespace

RenderedReport render_report(const ReportInputs& inputs) {
    RenderedReport r;
    r.json = build_json(inputs);
    r.text = build_text(r.json);
    return r;
}

}  // namespace devminer::report
