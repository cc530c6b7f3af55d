// devminer command-line interface.

#include "devminer/config.hpp"
#include "devminer/error.hpp"
#include "devminer/io.hpp"
#include "devminer/pipeline.hpp"
#include "devminer/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace devminer;
using pipeline::RunSettings;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitStage = 3;
constexpr int kExitValidation = 4;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::input: return kExitInput;
        case ErrorKind::validation: return kExitValidation;
        case ErrorKind::stage: return kExitStage;
    }
    return kExitStage;
}

/// Sets `target` from the option only when it was given on the command line.
template <typename T, typename U>
void override_with(const CLI::Option* opt, T& target, const U& value) {
    if (opt->count() > 0) target = value;
}

std::string config_text(const std::string& source_name) {
    return "# devminer run configuration for the bundled synthetic repository\n"
           "output = \"out\"\n\n"
           "[ingest]\n"
           "source = \"" + source_name + "\"\n"
           "format = \"jsonl\"\n"
           "iac_ext = [\".pp\"]\n\n"
           "[label]\n"
           "issues = \"issues.json\"\n\n"
           "[features]\n"
           "scripts = \"scripts\"\n\n"
           "[thresholds]\n"
           "max_developers = 11\n"
           "max_minors = 7\n"
           "min_highest_contrib = 0.8\n"
           "disjointness_quantile = 0.75\n"
           "unfocused_quantile = 0.75\n\n"
           "[predict]\n"
           "seed = 42\n"
           "tune = false\n"
           "repeats = 10\n"
           "folds = 10\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mine commit histories of infrastructure-as-code repositories for development anti-patterns."};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "TOML config; command-line flags take precedence")->check(CLI::ExistingFile);

    RunSettings cfg;
    std::string out;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Read a repository or log export into the normalized log export");
    std::string ingest_source, ingest_format = "jsonl", alias_map, summary_out;
    std::vector<std::string> iac_ext{".pp"};
    ingest->add_option("source", ingest_source, "Repository directory or JSONL log export")->required();
    auto* o_format = ingest->add_option("--format", ingest_format, "Input format")->check(CLI::IsMember({"git", "jsonl"}));
    auto* o_ingest_ext = ingest->add_option("--iac-ext", iac_ext, "IaC script extensions");
    auto* o_alias = ingest->add_option("--alias-map", alias_map, "JSON alias map for author identities");
    ingest->add_option("--summary", summary_out, "Write a JSON summary with the selection criteria");
    ingest->add_option("-o,--output", out, "Output JSONL")->required();

    // label
    auto* label = app.add_subcommand("label", "Label commits as defect-related");
    std::string commits, rules, import_csv, issues;
    label->add_option("--commits", commits, "Log export")->required();
    auto* o_rules = label->add_option("--rules", rules, "Keyword ruleset JSON");
    auto* o_import = label->add_option("--import", import_csv, "Rater label CSV");
    auto* o_issues = label->add_option("--issues", issues, "Issue store JSON");
    label->add_option("-o,--output", out, "Output labels JSONL")->required();

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Compute the per-script activity metric table");
    std::string labels;
    bool raw_betweenness = false;
    metrics_cmd->add_option("--commits", commits, "Log export")->required();
    metrics_cmd->add_option("--labels", labels, "Labels JSONL")->required();
    auto* o_metrics_ext = metrics_cmd->add_option("--iac-ext", iac_ext, "IaC script extensions");
    auto* o_raw = metrics_cmd->add_flag("--raw-betweenness", raw_betweenness, "Do not normalize edge betweenness");
    metrics_cmd->add_option("-o,--output", out, "Output CSV")->required();

    // graph
    auto* graph = app.add_subcommand("graph", "Dump the developer or contribution network");
    std::string graph_kind = "dev";
    graph->add_option("--commits", commits, "Log export")->required();
    graph->add_option("--kind", graph_kind, "Network kind")->check(CLI::IsMember({"dev", "contrib"}));
    auto* o_graph_ext = graph->add_option("--iac-ext", iac_ext, "IaC script extensions");
    graph->add_option("-o,--output", out, "Output JSON")->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Mann-Whitney, Cliff's delta and OMANOVA per metric");
    std::string metrics_csv;
    analyze->add_option("--metrics", metrics_csv, "Metric table CSV")->required();
    analyze->add_option("-o,--output", out, "Output JSON")->required();

    // features
    auto* features_cmd = app.add_subcommand("features", "Extract bag-of-words or code-quality features");
    std::string feature_kind, scripts_dir, lint_csv;
    features_cmd->add_option("--kind", feature_kind, "Feature kind")->required()->check(CLI::IsMember({"bow", "quality"}));
    auto* o_scripts = features_cmd->add_option("--scripts", scripts_dir, "Directory with script files");
    auto* o_features_ext = features_cmd->add_option("--iac-ext", iac_ext, "IaC script extensions");
    auto* o_lint = features_cmd->add_option("--lint", lint_csv, "CSV script,lint_warnings");
    features_cmd->add_option("-o,--output", out, "Output CSV")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "Cross-validate the learners on each feature set");
    std::string bow_csv, quality_csv, tune = "off";
    std::uint64_t seed = 0;
    int repeats = 10, folds = 10, generations = 10;
    std::vector<std::string> learners;
    predict->add_option("--metrics", metrics_csv, "Metric table CSV")->required();
    predict->add_option("--bow", bow_csv, "BOW CSV")->required();
    predict->add_option("--quality", quality_csv, "Quality CSV")->required();
    auto* o_seed = predict->add_option("--seed", seed, "Master seed");
    auto* o_tune = predict->add_option("--tune", tune, "Differential-evolution tuning")->check(CLI::IsMember({"on", "off"}));
    auto* o_repeats = predict->add_option("--repeats", repeats, "Cross-validation repeats")->check(CLI::PositiveNumber);
    auto* o_folds = predict->add_option("--folds", folds, "Folds per repeat")->check(CLI::Range(2, 100));
    auto* o_gens = predict->add_option("--de-generations", generations, "DE generations")->check(CLI::PositiveNumber);
    auto* o_learners = predict->add_option("--learners", learners, "Subset of CART, LR, NB, RF");
    predict->add_option("-o,--output", out, "Output JSON")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "Flag anti-patterns and render the text/JSON report");
    std::string stats_json, prediction_json, survey_csv;
    double max_devs = 0, max_minors = 0, min_highest = 0, dq = 0, uq = 0;
    report_cmd->add_option("--metrics", metrics_csv, "Metric table CSV")->required();
    report_cmd->add_option("--stats", stats_json, "Output of analyze");
    report_cmd->add_option("--prediction", prediction_json, "Output of predict");
    auto* o_survey = report_cmd->add_option("--survey", survey_csv, "Survey CSV respondent,metric,likert");
    auto* o_max_devs = report_cmd->add_option("--max-developers", max_devs);
    auto* o_max_minors = report_cmd->add_option("--max-minors", max_minors);
    auto* o_min_highest = report_cmd->add_option("--min-highest-contrib", min_highest);
    auto* o_dq = report_cmd->add_option("--disjointness-quantile", dq);
    auto* o_uq = report_cmd->add_option("--unfocused-quantile", uq);
    report_cmd->add_option("-o,--output", out, "Output path stem; writes <stem>.txt and <stem>.json")->required();

    // run
    auto* run = app.add_subcommand("run", "Run every stage from a TOML config");
    std::string run_config;
    run->add_option("config", run_config, "Pipeline config (or the global --config)")->check(CLI::ExistingFile);

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthetic repository with a run config");
    synth::SynthOptions synth_options;
    synth->add_option("--scripts", synth_options.scripts, "Number of scripts");
    synth->add_option("--seed", synth_options.seed, "Generator seed");
    synth->add_option("--violators", synth_options.violators, "Scripts above the neutral developer/minor bounds");
    synth->add_option("--noise", synth_options.score_noise, "Sd of the noise on the latent risk score");
    synth->add_option("--label-flip", synth_options.label_flip, "Probability a label is flipped");
    synth->add_flag("--constrain-neutral", synth_options.constrain_neutral, "Keep neutral scripts within the bounds");
    synth->add_option("-o,--output", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (!config_path.empty()) pipeline::apply_config(Config::load(config_path), fs::path(config_path).parent_path(), cfg);

        if (ingest->parsed()) {
            cfg.ingest.source = ingest_source;
            if (o_format->count() > 0)
                cfg.ingest.format = ingest_format == "git" ? history::SourceFormat::git : history::SourceFormat::jsonl;
            override_with(o_ingest_ext, cfg.ingest.iac_extensions, iac_ext);
            if (o_alias->count() > 0) cfg.ingest.alias_map = alias_map;
            std::optional<fs::path> summary;
            if (!summary_out.empty()) summary = summary_out;
            const auto outcome = pipeline::run_ingest(cfg.ingest, out, summary);
            const auto& v = outcome.verdict;
            std::cout << "commits: " << outcome.summary.commits.size() << "\n"
                      << "files: " << outcome.summary.total_files << " (IaC " << outcome.summary.iac_files << ")\n"
                      << "IaC share: " << v.iac_share << (v.iac_share_pass ? " pass" : " fail")
                      << (v.zero_denominator ? " (no files)" : "") << "\n"
                      << "median monthly commits: " << v.median_monthly_commits << (v.activity_pass ? " pass" : " fail") << "\n"
                      << "selected: " << (v.final ? "yes" : "no") << "\n";
        } else if (label->parsed()) {
            if (o_rules->count() > 0) cfg.label.rules = rules;
            if (o_import->count() > 0) cfg.label.imported = import_csv;
            if (o_issues->count() > 0) cfg.label.issues = issues;
            const auto defects = pipeline::run_label(commits, cfg.label, out);
            std::cout << "defect-related commits: " << defects << "\n";
        } else if (metrics_cmd->parsed()) {
            override_with(o_metrics_ext, cfg.metrics.iac_extensions, iac_ext);
            override_with(o_raw, cfg.metrics.normalize_edge_betweenness, !raw_betweenness);
            const auto n = pipeline::run_metrics(commits, labels, cfg.metrics, out);
            std::cout << "scripts: " << n << "\n";
        } else if (graph->parsed()) {
            override_with(o_graph_ext, cfg.metrics.iac_extensions, iac_ext);
            pipeline::run_graph(commits, graph_kind == "dev" ? pipeline::GraphKind::developer : pipeline::GraphKind::contribution,
                                cfg.metrics.iac_extensions, out);
        } else if (analyze->parsed()) {
            pipeline::run_analyze(metrics_csv, out);
        } else if (features_cmd->parsed()) {
            override_with(o_scripts, cfg.features.scripts, fs::path(scripts_dir));
            override_with(o_features_ext, cfg.features.iac_extensions, iac_ext);
            if (o_lint->count() > 0) cfg.features.lint = lint_csv;
            if (cfg.features.scripts.empty()) throw ArgumentError("features: --scripts is required");
            pipeline::run_features(feature_kind == "bow" ? pipeline::FeatureKind::bow : pipeline::FeatureKind::quality,
                                   cfg.features, out);
        } else if (predict->parsed()) {
            auto& p = cfg.predict;
            override_with(o_seed, p.seed, seed);
            override_with(o_tune, p.tune, tune == "on");
            override_with(o_repeats, p.repeats, repeats);
            override_with(o_folds, p.folds, folds);
            override_with(o_gens, p.de_generations, generations);
            if (o_learners->count() > 0) {
                p.learners.clear();
                for (const auto& l : learners) p.learners.push_back(ml::parse_learner(l));
            }
            pipeline::run_predict(metrics_csv, bow_csv, quality_csv, p, out);
        } else if (report_cmd->parsed()) {
            auto& r = cfg.report;
            auto& t = r.thresholds;
            override_with(o_max_devs, t.max_developers, max_devs);
            override_with(o_max_minors, t.max_minors, max_minors);
            override_with(o_min_highest, t.min_highest_contrib, min_highest);
            override_with(o_dq, t.disjointness_quantile, dq);
            override_with(o_uq, t.unfocused_quantile, uq);
            t.validate();
            if (!stats_json.empty()) r.stats = stats_json;
            if (!prediction_json.empty()) r.prediction = prediction_json;
            if (o_survey->count() > 0) r.survey = survey_csv;
            pipeline::run_report(metrics_csv, r, out);
            std::cout << io::read_text(out + ".txt");
        } else if (run->parsed()) {
            if (run_config.empty()) run_config = config_path;
            if (run_config.empty()) throw ArgumentError("run needs a config file");
            const fs::path path(run_config);
            const auto settings = pipeline::load_run_settings(Config::load(run_config), path.parent_path());
            pipeline::run_pipeline(settings, [](const std::string& stage) { std::cerr << "[" << stage << "]\n"; });
            std::cout << "artifacts written to " << settings.output.string() << "\n";
        } else if (synth->parsed()) {
            const auto repo = synth::generate(synth_options);
            const fs::path dir(out);
            synth::write_repository(repo, dir);
            io::write_text(dir / "config.toml", config_text("history.jsonl"));
            std::cout << "scripts: " << repo.plans.size() << ", commits: " << repo.commits.size() << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStage;
    }
    return kExitOk;
}
