#include "devminer/pipeline.hpp"

#include "devminer/evaluation.hpp"
#include "devminer/features.hpp"
#include "devminer/io.hpp"
#include "devminer/labeling.hpp"
#include "devminer/metrics.hpp"
#include "devminer/networks.hpp"
#include "devminer/report.hpp"

#include <json.hpp>

#include <sstream>

namespace devminer::pipeline {

namespace {

using Json = nlohmann::ordered_json;

std::string dump(const Json& j) { return j.dump(2, ' ', false, Json::error_handler_t::replace) + "\n"; }

std::vector<history::CommitRecord> load_commits(const fs::path& file) {
    return history::parse_log_export(io::read_text(file));
}

Json read_json(const fs::path& file) {
    try {
        return Json::parse(io::read_text(file));
    } catch (const Json::parse_error& e) {
        throw ParseError(file.string() + ": " + e.what(), 1);
    }
}

std::set<std::string> script_set(std::span<const history::CommitRecord> commits, const history::IacFilter& filter) {
    std::set<std::string> out;
    for (const auto& c : commits)
        for (const auto& ch : c.changes)
            if (filter(ch.path)) out.insert(ch.path);
    return out;
}

}  // namespace

IngestOutcome run_ingest(const IngestSettings& settings, const fs::path& out, const std::optional<fs::path>& summary_out) {
    history::IngestOptions options;
    options.format = settings.format;
    options.filter = history::IacFilter(settings.iac_extensions);
    if (settings.alias_map) options.aliases = history::load_alias_map(*settings.alias_map);
    IngestOutcome outcome;
    outcome.summary = history::ingest_repository(settings.source, options);
    outcome.verdict = history::apply_selection_criteria(outcome.summary);

    std::ostringstream log;
    history::write_log_export(log, outcome.summary.commits);
    io::write_text(out, log.str());
    if (summary_out) {
        const auto& v = outcome.verdict;
        Json j;
        j["repo_id"] = outcome.summary.repo_id;
        j["commits"] = outcome.summary.commits.size();
        j["total_files"] = outcome.summary.total_files;
        j["iac_files"] = outcome.summary.iac_files;
        Json months = Json::array();
        for (const auto& m : outcome.summary.commit_months)
            months.push_back({{"year", m.year}, {"month", m.month}, {"commits", m.commits}});
        j["commit_months"] = std::move(months);
        j["criteria"] = {{"available", v.available},
                         {"iac_share", v.iac_share},
                         {"iac_share_pass", v.iac_share_pass},
                         {"zero_denominator", v.zero_denominator},
                         {"median_monthly_commits", v.median_monthly_commits},
                         {"activity_pass", v.activity_pass},
                         {"selected", v.final}};
        io::write_text(*summary_out, dump(j));
    }
    return outcome;
}

std::size_t run_label(const fs::path& commits_file, const LabelSettings& settings, const fs::path& out) {
    const auto commits = load_commits(commits_file);
    const auto rules = settings.rules ? labeling::Ruleset::load(*settings.rules) : labeling::Ruleset::defaults();
    const auto issues = settings.issues ? labeling::IssueStore::load(*settings.issues) : labeling::IssueStore{};
    std::vector<labeling::DefectLabel> imported;
    if (settings.imported) imported = labeling::import_labels_file(*settings.imported);
    const auto labels = labeling::label_commits(commits, issues, rules, imported);
    std::string text;
    std::size_t defects = 0;
    for (const auto& l : labels) {
        text += labeling::to_jsonl_line(l) + "\n";
        defects += l.is_defect_related ? 1 : 0;
    }
    io::write_text(out, text);
    return defects;
}

std::size_t run_metrics(const fs::path& commits_file, const fs::path& labels_file, const MetricSettings& settings,
                        const fs::path& out) {
    metrics::Dataset dataset;
    dataset.commits = load_commits(commits_file);
    const auto labels = labeling::parse_labels_jsonl(io::read_text(labels_file));
    const history::IacFilter filter(settings.iac_extensions);
    dataset.scripts = labeling::label_scripts(labels, dataset.commits, filter);
    metrics::MetricOptions options;
    options.normalize_edge_betweenness = settings.normalize_edge_betweenness;
    const auto table = metrics::metric_table(dataset, options);
    std::ostringstream csv;
    metrics::write_metric_csv(csv, table);
    io::write_text(out, csv.str());
    return table.size();
}

void run_graph(const fs::path& commits_file, GraphKind kind, const std::vector<std::string>& iac_extensions,
               const fs::path& out) {
    const auto commits = load_commits(commits_file);
    const auto scripts = script_set(commits, history::IacFilter(iac_extensions));
    Json j;
    Json nodes = Json::array(), edges = Json::array();
    if (kind == GraphKind::developer) {
        const auto net = net::build_developer_network(commits, scripts);
        const auto btw = net::edge_betweenness(net);
        for (const auto& n : net.nodes()) nodes.push_back({{"id", n}, {"kind", "developer"}});
        for (const auto& [e, provenance] : net.edges()) {
            edges.push_back({{"source", net.nodes()[e.first]},
                             {"target", net.nodes()[e.second]},
                             {"weight", 1},
                             {"betweenness", btw.at(e)},
                             {"scripts", std::vector<std::string>(provenance.begin(), provenance.end())}});
        }
        j["kind"] = "developer";
    } else {
        const auto net = net::build_contribution_network(commits, scripts);
        const auto centrality = net::betweenness_centrality_all(net);
        for (const auto& d : net.developers()) nodes.push_back({{"id", d}, {"kind", "developer"}});
        for (const auto& s : net.scripts())
            nodes.push_back({{"id", s}, {"kind", "script"}, {"betweenness", centrality.at(s)}});
        for (const auto& e : net.edges())
            edges.push_back({{"source", net.developers()[e.developer]}, {"target", net.scripts()[e.script]}, {"weight", e.weight}});
        j["kind"] = "contribution";
    }
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    io::write_text(out, dump(j));
}

void run_analyze(const fs::path& metrics_file, const fs::path& out) {
    const auto table = metrics::read_metric_csv(metrics_file.string());
    io::write_text(out, dump(report::analysis_to_json(report::analyze_metrics(table))));
}

void run_features(FeatureKind kind, const FeatureSettings& settings, const fs::path& out) {
    const auto scripts = features::load_scripts(settings.scripts, history::IacFilter(settings.iac_extensions));
    std::ostringstream csv;
    if (kind == FeatureKind::bow) {
        std::vector<features::BowVector> vectors;
        for (const auto& s : scripts) {
            try {
                vectors.push_back(features::bow_extract(s.text, s.path));
            } catch (const EncodingError& e) {
                throw DataError(s.path + ": " + e.what());
            }
        }
        features::write_bow_csv(csv, vectors);
    } else {
        std::map<std::string, std::size_t> lint;
        if (settings.lint) lint = features::parse_lint_csv(io::read_text(*settings.lint));
        features::write_quality_csv(csv, features::scan_quality(scripts, lint));
    }
    io::write_text(out, csv.str());
}

void run_predict(const fs::path& metrics_file, const fs::path& bow_file, const fs::path& quality_file,
                 const PredictSettings& settings, const fs::path& out) {
    const auto table = metrics::read_metric_csv(metrics_file.string());
    std::vector<ml::FeatureMatrix> sets;
    sets.push_back(ml::activity_features(table));
    sets.push_back(ml::bow_features(features::parse_bow_csv(io::read_text(bow_file)), sets.front()));
    sets.push_back(ml::quality_features(features::parse_quality_csv(io::read_text(quality_file)), sets.front()));
    ml::CompareOptions options;
    options.cv.seed = settings.seed;
    options.cv.tune = settings.tune;
    options.cv.repeats = settings.repeats;
    options.cv.folds = settings.folds;
    options.cv.de_generations = settings.de_generations;
    options.learners = settings.learners;
    options.sk_bootstrap = settings.sk_bootstrap;
    io::write_text(out, dump(ml::report_to_json(ml::compare_feature_sets(sets, options))));
}

void run_report(const fs::path& metrics_file, const ReportSettings& settings, const fs::path& out_stem) {
    const auto table = metrics::read_metric_csv(metrics_file.string());
    const auto flags = antipatterns::flag_antipatterns(table, settings.thresholds);
    std::optional<Json> stats, prediction;
    if (settings.stats) stats = read_json(*settings.stats);
    if (settings.prediction) prediction = read_json(*settings.prediction);
    std::vector<report::SurveyTally> survey;
    if (settings.survey) {
        const auto rows = report::parse_survey_csv(io::read_text(*settings.survey));
        survey = report::tally_survey(rows);
    }
    report::ReportInputs in;
    in.stats = stats ? &*stats : nullptr;
    in.flags = flags;
    in.thresholds = settings.thresholds;
    in.evaluation = prediction ? &*prediction : nullptr;
    in.survey = survey;
    const auto rendered = report::render_report(in);
    fs::path txt = out_stem, json = out_stem;
    txt += ".txt";
    json += ".json";
    io::write_text(txt, rendered.text);
    io::write_text(json, dump(rendered.json));
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::optional<fs::path> optional_path(const Config& c, const std::string& section, const std::string& key,
                                      const fs::path& base) {
    const auto v = c.get_string(section, key);
    if (!v || v->empty()) return std::nullopt;
    return resolve(base, *v);
}

}  // namespace

void apply_config(const Config& c, const fs::path& base, RunSettings& s) {
    if (const auto v = c.get_string("", "output")) s.output = resolve(base, *v);

    if (const auto v = c.get_string("ingest", "source")) s.ingest.source = resolve(base, *v);
    if (const auto format = c.get_string("ingest", "format")) {
        if (*format == "git") s.ingest.format = history::SourceFormat::git;
        else if (*format == "jsonl") s.ingest.format = history::SourceFormat::jsonl;
        else throw ArgumentError("config: [ingest] format must be git or jsonl");
    }
    if (const auto ext = c.get_strings("ingest", "iac_ext")) {
        s.ingest.iac_extensions = *ext;
        s.metrics.iac_extensions = *ext;
        s.features.iac_extensions = *ext;
    }
    if (const auto v = optional_path(c, "ingest", "alias_map", base)) s.ingest.alias_map = v;

    if (const auto v = optional_path(c, "label", "rules", base)) s.label.rules = v;
    if (const auto v = optional_path(c, "label", "import", base)) s.label.imported = v;
    if (const auto v = optional_path(c, "label", "issues", base)) s.label.issues = v;

    if (const auto v = c.get_bool("metrics", "normalize_edge_betweenness")) s.metrics.normalize_edge_betweenness = *v;

    if (const auto v = c.get_string("features", "scripts")) s.features.scripts = resolve(base, *v);
    if (const auto v = optional_path(c, "features", "lint", base)) s.features.lint = v;

    auto& t = s.report.thresholds;
    t.max_developers = c.get_double("thresholds", "max_developers").value_or(t.max_developers);
    t.max_minors = c.get_double("thresholds", "max_minors").value_or(t.max_minors);
    t.min_highest_contrib = c.get_double("thresholds", "min_highest_contrib").value_or(t.min_highest_contrib);
    t.disjointness_quantile = c.get_double("thresholds", "disjointness_quantile").value_or(t.disjointness_quantile);
    t.unfocused_quantile = c.get_double("thresholds", "unfocused_quantile").value_or(t.unfocused_quantile);
    t.validate();
    if (const auto v = optional_path(c, "report", "survey", base)) s.report.survey = v;

    auto& p = s.predict;
    p.seed = static_cast<std::uint64_t>(c.get_int("predict", "seed").value_or(static_cast<std::int64_t>(p.seed)));
    p.tune = c.get_bool("predict", "tune").value_or(p.tune);
    p.repeats = static_cast<int>(c.get_int("predict", "repeats").value_or(p.repeats));
    p.folds = static_cast<int>(c.get_int("predict", "folds").value_or(p.folds));
    p.de_generations = static_cast<int>(c.get_int("predict", "de_generations").value_or(p.de_generations));
    p.sk_bootstrap = static_cast<int>(c.get_int("predict", "sk_bootstrap").value_or(p.sk_bootstrap));
    if (const auto learners = c.get_strings("predict", "learners")) {
        p.learners.clear();
        for (const auto& l : *learners) p.learners.push_back(ml::parse_learner(l));
    }
}

RunSettings load_run_settings(const Config& c, const fs::path& base) {
    RunSettings s;
    s.output = base / "out";
    apply_config(c, base, s);
    if (s.ingest.source.empty()) throw ArgumentError("config: [ingest] source is required");
    if (s.features.scripts.empty()) throw ArgumentError("config: [features] scripts is required");
    return s;
}

const std::vector<std::string>& run_artifacts() {
    static const std::vector<std::string> names{"commits.jsonl", "ingest.json",  "labels.jsonl", "metrics.csv",
                                                "stats.json",    "bow.csv",      "quality.csv",  "prediction.json",
                                                "report.txt",    "report.json"};
    return names;
}

void run_pipeline(const RunSettings& s, const std::function<void(const std::string&)>& progress) {
    const fs::path& o = s.output;
    auto stage = [&](const std::string& name, const auto& body) {
        if (progress) progress(name);
        try {
            body();
        } catch (const Error& e) {
            throw StageError(name, e);
        } catch (const std::exception& e) {
            throw StageError(name, Error(ErrorKind::stage, e.what()));
        }
    };
    stage("ingest", [&] { run_ingest(s.ingest, o / "commits.jsonl", o / "ingest.json"); });
    stage("label", [&] { run_label(o / "commits.jsonl", s.label, o / "labels.jsonl"); });
    stage("metrics", [&] { run_metrics(o / "commits.jsonl", o / "labels.jsonl", s.metrics, o / "metrics.csv"); });
    stage("analyze", [&] { run_analyze(o / "metrics.csv", o / "stats.json"); });
    stage("features", [&] {
        run_features(FeatureKind::bow, s.features, o / "bow.csv");
        run_features(FeatureKind::quality, s.features, o / "quality.csv");
    });
    stage("predict", [&] { run_predict(o / "metrics.csv", o / "bow.csv", o / "quality.csv", s.predict, o / "prediction.json"); });
    stage("report", [&] {
        ReportSettings r = s.report;
        r.stats = o / "stats.json";
        r.prediction = o / "prediction.json";
        run_report(o / "metrics.csv", r, o / "report");
    });
}

}  // namespace devminer::pipeline
