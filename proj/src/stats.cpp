#include "devminer/stats.hpp"

#include "devminer/error.hpp"
#include "devminer/special_functions.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace devminer::stats {

std::string_view to_string(Direction d) {
    return d == Direction::defective_greater ? "defective_greater" : "neutral_greater";
}

std::string_view to_string(Magnitude m) {
    switch (m) {
        case Magnitude::negligible: return "negligible";
        case Magnitude::small: return "small";
        case Magnitude::medium: return "medium";
        case Magnitude::large: return "large";
    }
    return "negligible";
}

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

constexpr std::size_t kExactMaxSide = 8;

/// P(sum of doubled ranks of a random size-k subset >= threshold) when
/// `upper`, else P(<= threshold). Counts subsets by dynamic programming.
double exact_rank_sum_tail(const std::vector<long>& doubled, std::size_t k, long threshold, bool upper) {
    const long max_sum = std::accumulate(doubled.begin(), doubled.end(), 0L);
    // ways[j][s]: subsets of size j with doubled-rank sum s
    std::vector<std::vector<long double>> ways(k + 1, std::vector<long double>(static_cast<std::size_t>(max_sum) + 1, 0.0L));
    ways[0][0] = 1.0L;
    for (const long r : doubled) {
        for (std::size_t j = k; j >= 1; --j) {
            auto& to = ways[j];
            const auto& from = ways[j - 1];
            for (long s = max_sum; s >= r; --s) to[static_cast<std::size_t>(s)] += from[static_cast<std::size_t>(s - r)];
        }
    }
    long double total = 0.0L, tail = 0.0L;
    for (long s = 0; s <= max_sum; ++s) {
        const long double w = ways[k][static_cast<std::size_t>(s)];
        total += w;
        if (upper ? s >= threshold : s <= threshold) tail += w;
    }
    return static_cast<double>(tail / total);
}

}  // namespace

TestResult mann_whitney_one_sided(std::span<const double> defective, std::span<const double> neutral,
                                  Direction direction, std::string metric_name) {
    if (defective.empty() || neutral.empty()) throw ArgumentError("Mann-Whitney: empty sample");
    TestResult result;
    result.metric_name = std::move(metric_name);
    result.direction = direction;
    result.n_defective = defective.size();
    result.n_neutral = neutral.size();

    std::vector<double> pooled(defective.begin(), defective.end());
    pooled.insert(pooled.end(), neutral.begin(), neutral.end());
    const auto ranks = midranks(pooled);
    const double n1 = static_cast<double>(defective.size());
    const double n2 = static_cast<double>(neutral.size());
    const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(defective.size()), 0.0);
    result.u_statistic = rank_sum - n1 * (n1 + 1.0) / 2.0;
    const bool upper = direction == Direction::defective_greater;

    if (std::min(defective.size(), neutral.size()) <= kExactMaxSide) {
        result.exact = true;
        std::vector<long> doubled(ranks.size());
        for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = std::lround(ranks[i] * 2.0);
        const long observed = std::lround(rank_sum * 2.0);
        // choose the smaller side for the subset DP; its rank sum mirrors the other
        if (defective.size() <= neutral.size()) {
            result.p_value = exact_rank_sum_tail(doubled, defective.size(), observed, upper);
        } else {
            const long total = std::accumulate(doubled.begin(), doubled.end(), 0L);
            result.p_value = exact_rank_sum_tail(doubled, neutral.size(), total - observed, !upper);
        }
    } else {
        const double n = n1 + n2;
        double tie_term = 0.0;
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i);
            tie_term += t * t * t - t;
            i = j;
        }
        const double mean = n1 * n2 / 2.0;
        const double variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
        if (variance <= 0.0) {
            result.p_value = 1.0;  // every value tied
        } else {
            const double sd = std::sqrt(variance);
            result.p_value = upper ? special::normal_sf((result.u_statistic - mean - 0.5) / sd)
                                   : special::normal_cdf((result.u_statistic - mean + 0.5) / sd);
        }
    }
    result.p_value = std::clamp(result.p_value, 0.0, 1.0);
    result.significant = result.p_value < kAlpha;
    return result;
}

Magnitude romano_magnitude(double delta) {
    const double a = std::fabs(delta);
    if (a >= 0.47) return Magnitude::large;
    if (a >= 0.33) return Magnitude::medium;
    if (a >= 0.14) return Magnitude::small;
    return Magnitude::negligible;
}

double cliffs_delta_value(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ArgumentError("Cliff's delta: empty sample");
    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    double dominance = 0.0;
    for (double v : x) {
        const auto below = std::lower_bound(ys.begin(), ys.end(), v) - ys.begin();
        const auto above = ys.end() - std::upper_bound(ys.begin(), ys.end(), v);
        dominance += static_cast<double>(below - above);
    }
    return dominance / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

EffectSize cliffs_delta(std::span<const double> x, std::span<const double> y, std::string metric_name) {
    EffectSize e;
    e.metric_name = std::move(metric_name);
    e.delta = cliffs_delta_value(x, y);
    e.magnitude = romano_magnitude(e.delta);
    return e;
}

std::vector<double> log1p_transform(std::span<const double> values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        if (v < 0.0) throw ArgumentError("log1p transform needs non-negative values");
        out.push_back(std::log1p(v));
    }
    return out;
}

double skewness(std::span<const double> values) {
    if (values.empty()) return 0.0;
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) return 0.0;
    return m3 / std::pow(m2, 1.5);
}

OmanovaResult omanova(std::span<const double> metric, std::span<const double> size, std::span<const double> age,
                      std::span<const bool> defective, std::string metric_name) {
    const std::size_t n = defective.size();
    if (metric.size() != n || size.size() != n || age.size() != n) throw ArgumentError("OMANOVA: input lengths differ");
    const auto n_def = static_cast<std::size_t>(std::count(defective.begin(), defective.end(), true));
    if (n_def < 2 || n - n_def < 2) throw ArgumentError("OMANOVA: each class needs at least two samples");

    OmanovaResult result;
    result.size.name = "size";
    result.age.name = "age";
    result.metric.name = std::move(metric_name);
    std::array<ResponseTest*, 3> tests{&result.size, &result.age, &result.metric};
    std::array<std::span<const double>, 3> columns{size, age, metric};

    Eigen::MatrixXd y(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index j = 0; j < 3; ++j) {
        const auto col = columns[static_cast<std::size_t>(j)];
        const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        if (*lo == *hi) throw DegenerateError("OMANOVA: response '" + tests[static_cast<std::size_t>(j)]->name + "' is constant");
        std::vector<double> values(col.begin(), col.end());
        if (std::fabs(skewness(values)) > kSkewnessThreshold && *lo >= 0.0) {
            values = log1p_transform(values);
            tests[static_cast<std::size_t>(j)]->transformed = true;
        }
        for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i), j) = values[i];
    }

    const Eigen::RowVector3d grand = y.colwise().mean();
    Eigen::RowVector3d mean_def = Eigen::RowVector3d::Zero(), mean_neu = Eigen::RowVector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) (defective[i] ? mean_def : mean_neu) += y.row(static_cast<Eigen::Index>(i));
    mean_def /= static_cast<double>(n_def);
    mean_neu /= static_cast<double>(n - n_def);

    Eigen::Matrix3d hyp = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d err = Eigen::Matrix3d::Zero();
    const Eigen::RowVector3d dd = mean_def - grand, dn = mean_neu - grand;
    hyp += static_cast<double>(n_def) * dd.transpose() * dd;
    hyp += static_cast<double>(n - n_def) * dn.transpose() * dn;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::RowVector3d r = y.row(static_cast<Eigen::Index>(i)) - (defective[i] ? mean_def : mean_neu);
        err += r.transpose() * r;
    }

    const double df_within = static_cast<double>(n) - 2.0;
    for (Eigen::Index j = 0; j < 3; ++j) {
        auto* t = tests[static_cast<std::size_t>(j)];
        const double ms_within = err(j, j) / df_within;
        t->f_statistic = ms_within > 0.0 ? hyp(j, j) / ms_within : std::numeric_limits<double>::infinity();
        t->p_value = special::f_sf(t->f_statistic, 1.0, df_within);
    }

    const Eigen::Matrix3d total = hyp + err;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(total);
    const double p = 3.0;
    const double df2 = static_cast<double>(n) - p - 1.0;
    if (lu.isInvertible() && df2 > 0.0) {
        result.pillai_trace = (hyp * lu.inverse()).trace();
        if (result.pillai_trace < 1.0) {
            result.pillai_f = result.pillai_trace / (1.0 - result.pillai_trace) * df2 / p;
            result.pillai_p = special::f_sf(result.pillai_f, p, df2);
        } else {
            result.pillai_f = std::numeric_limits<double>::infinity();
            result.pillai_p = 0.0;
        }
    } else {
        result.pillai_trace = std::numeric_limits<double>::quiet_NaN();
        result.pillai_f = std::numeric_limits<double>::quiet_NaN();
        result.pillai_p = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

}  // namespace devminer::stats
