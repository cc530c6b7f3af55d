#include "devminer/antipatterns.hpp"

#include "devminer/error.hpp"

#include <algorithm>
#include <cmath>

namespace devminer::antipatterns {

std::string_view to_string(Pattern p) {
    switch (p) {
        case Pattern::boss_not_around: return "boss_not_around";
        case Pattern::many_cooks: return "many_cooks";
        case Pattern::minors_spoilers: return "minors_spoilers";
        case Pattern::silos: return "silos";
        case Pattern::unfocused: return "unfocused";
    }
    return "many_cooks";
}

const std::vector<Pattern>& all_patterns() {
    static const std::vector<Pattern> patterns{Pattern::boss_not_around, Pattern::many_cooks, Pattern::minors_spoilers,
                                               Pattern::silos, Pattern::unfocused};
    return patterns;
}

void ThresholdConfig::validate() const {
    auto in_open_unit = [](double q) { return q > 0.0 && q < 1.0; };
    if (!in_open_unit(disjointness_quantile) || !in_open_unit(unfocused_quantile))
        throw ArgumentError("threshold quantiles must lie in (0, 1)");
    if (max_developers < 0 || max_minors < 0) throw ArgumentError("count thresholds must be non-negative");
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ArgumentError("quantile of an empty list");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<AntiPatternFlag> flag_antipatterns(std::span<const metrics::MetricVector> table, const ThresholdConfig& config) {
    if (table.empty()) throw ArgumentError("anti-pattern flagging needs a non-empty metric table");
    config.validate();
    std::vector<double> disjoint, unfocused;
    for (const auto& m : table) {
        disjoint.push_back(m.disjointness);
        unfocused.push_back(m.unfocused_contribution);
    }
    const double silos_cut = quantile(disjoint, config.disjointness_quantile);
    const double unfocused_cut = quantile(unfocused, config.unfocused_quantile);

    std::vector<AntiPatternFlag> flags;
    flags.reserve(table.size() * all_patterns().size());
    for (const auto& m : table) {
        auto add = [&](Pattern p, std::optional<double> value, double threshold, bool greater, bool relative) {
            AntiPatternFlag f{m.script_path, p, false, value, threshold, relative};
            if (value) f.triggered = greater ? *value > threshold : *value < threshold;
            flags.push_back(std::move(f));
        };
        add(Pattern::boss_not_around, m.highest_contrib_code, config.min_highest_contrib, false, false);
        add(Pattern::many_cooks, static_cast<double>(m.developer_count), config.max_developers, true, false);
        std::optional<double> minors;
        if (m.minor_contributors) minors = static_cast<double>(*m.minor_contributors);
        add(Pattern::minors_spoilers, minors, config.max_minors, true, false);
        add(Pattern::silos, m.disjointness, silos_cut, true, true);
        add(Pattern::unfocused, m.unfocused_contribution, unfocused_cut, true, true);
    }
    return flags;
}

}  // namespace devminer::antipatterns
