#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace devminer::stats {

inline constexpr double kAlpha = 0.01;

/// Alternative hypothesis of the one-sided test.
enum class Direction { defective_greater, neutral_greater };

std::string_view to_string(Direction d);

struct TestResult {
    std::string metric_name;
    double u_statistic = 0.0;  ///< U of the defective sample
    double p_value = 1.0;
    Direction direction = Direction::defective_greater;
    bool significant = false;  ///< p < kAlpha
    bool exact = false;
    std::size_t n_defective = 0;
    std::size_t n_neutral = 0;
};

/// Midranks (average ranks for ties) of the values, 1-based.
std::vector<double> midranks(std::span<const double> values);

/// One-sided Mann-Whitney U test of `defective` against `neutral`. Exact
/// (conditional on ties) when either sample has at most 8 values; normal
/// approximation with tie-corrected variance and continuity correction
/// otherwise.
TestResult mann_whitney_one_sided(std::span<const double> defective, std::span<const double> neutral,
                                  Direction direction, std::string metric_name = {});

enum class Magnitude { negligible, small, medium, large };

std::string_view to_string(Magnitude m);

/// Romano et al. bins on |delta|: <0.14, <0.33, <0.47, otherwise large.
Magnitude romano_magnitude(double delta);

struct EffectSize {
    std::string metric_name;
    double delta = 0.0;
    Magnitude magnitude = Magnitude::negligible;
};

/// (#{x > y} - #{x < y}) / (|x| |y|), computed by sorting.
double cliffs_delta_value(std::span<const double> x, std::span<const double> y);

EffectSize cliffs_delta(std::span<const double> x, std::span<const double> y, std::string metric_name = {});

/// Elementwise ln(1 + v); negative input is an ArgumentError.
std::vector<double> log1p_transform(std::span<const double> values);

/// In-place log1p over a dense block.
template <typename Derived>
void log1p_inplace(Eigen::DenseBase<Derived>& block) {
    block = block.derived().unaryExpr([](auto v) { return static_cast<decltype(v)>(std::log1p(v)); });
}

/// Population-moment skewness m3 / m2^1.5; 0 for constant input.
double skewness(std::span<const double> values);

inline constexpr double kSkewnessThreshold = 1.0;

struct ResponseTest {
    std::string name;
    bool transformed = false;
    double f_statistic = 0.0;
    double p_value = 1.0;
};

struct OmanovaResult {
    ResponseTest size;
    ResponseTest age;
    ResponseTest metric;
    double pillai_trace = 0.0;
    double pillai_f = 0.0;
    double pillai_p = 1.0;
};

/// One-way MANOVA of (size, age, metric) on the defective/neutral factor.
/// Responses with |skewness| > 1 and no negative values are log1p
/// transformed first. Per-response p-values come from the univariate F test;
/// Pillai's trace is reported alongside.
OmanovaResult omanova(std::span<const double> metric, std::span<const double> size, std::span<const double> age,
                      std::span<const bool> defective, std::string metric_name = "metric");

}  // namespace devminer::stats
