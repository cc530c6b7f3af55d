#pragma once

#include "devminer/antipatterns.hpp"
#include "devminer/metrics.hpp"
#include "devminer/stats.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace devminer::report {

using Json = nlohmann::ordered_json;

struct MetricAnalysis {
    std::string metric;
    stats::TestResult test;
    stats::EffectSize effect;
    std::optional<stats::OmanovaResult> omanova;
    std::string omanova_error;  ///< set when the OMANOVA inputs are degenerate
};

struct Analysis {
    std::size_t n_defective = 0;
    std::size_t n_neutral = 0;
    std::vector<MetricAnalysis> metrics;
};

/// Expected direction per activity metric: neutral scripts have the larger
/// highest-contributor share, defective scripts the larger value otherwise.
stats::Direction expected_direction(std::string_view metric);

/// Mann-Whitney, Cliff's delta and OMANOVA for every activity metric. Scripts
/// with an undefined value for a metric are left out of that metric's tests.
Analysis analyze_metrics(std::span<const metrics::MetricVector> table);

Json analysis_to_json(const Analysis& analysis);

struct SurveyRow {
    std::string respondent;
    std::string metric;
    int likert = 0;  ///< 1 strongly disagree .. 5 strongly agree
};

struct SurveyTally {
    std::string metric;
    std::size_t responses = 0;
    std::size_t agree = 0;  ///< agree or strongly agree
    double percent_agree = 0.0;
};

/// CSV `respondent,metric,likert`; likert outside 1..5 is a ParseError.
std::vector<SurveyRow> parse_survey_csv(std::string_view text);

/// Per metric, in order of first appearance.
std::vector<SurveyTally> tally_survey(std::span<const SurveyRow> rows);

struct ReportInputs {
    const Json* stats = nullptr;        ///< analysis_to_json output
    std::span<const antipatterns::AntiPatternFlag> flags;
    antipatterns::ThresholdConfig thresholds;
    const Json* evaluation = nullptr;   ///< prediction report
    std::span<const SurveyTally> survey;
};

struct RenderedReport {
    std::string text;
    Json json;
};

/// Text and JSON views of the same content; absent inputs omit their section.
RenderedReport render_report(const ReportInputs& inputs);

}  // namespace devminer::report
