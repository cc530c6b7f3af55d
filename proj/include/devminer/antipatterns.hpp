#pragma once

#include "devminer/metrics.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace devminer::antipatterns {

enum class Pattern { boss_not_around, many_cooks, minors_spoilers, silos, unfocused };

std::string_view to_string(Pattern p);
const std::vector<Pattern>& all_patterns();

/// Defaults follow the neutral-script observations; the two quantiles are
/// dataset-relative heuristics.
struct ThresholdConfig {
    double max_developers = 11;
    double max_minors = 7;
    double min_highest_contrib = 0.8;
    double disjointness_quantile = 0.75;
    double unfocused_quantile = 0.75;

    /// ArgumentError unless quantiles are in (0,1) and counts are >= 0.
    void validate() const;
};

struct AntiPatternFlag {
    std::string script_path;
    Pattern pattern = Pattern::many_cooks;
    bool triggered = false;
    std::optional<double> value;  ///< empty when the metric is undefined for the script
    double threshold = 0.0;
    bool dataset_relative = false;
};

/// Linear-interpolation quantile (type 7) of `values`.
double quantile(std::vector<double> values, double q);

/// Five flags per script in table order. Comparisons are strict.
std::vector<AntiPatternFlag> flag_antipatterns(std::span<const metrics::MetricVector> table, const ThresholdConfig& config);

}  // namespace devminer::antipatterns
