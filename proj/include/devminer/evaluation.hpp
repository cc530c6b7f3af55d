#pragma once

#include "devminer/features.hpp"
#include "devminer/learners.hpp"
#include "devminer/metrics.hpp"
#include "devminer/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace devminer::ml {

struct FeatureMatrix {
    std::string name;
    std::vector<std::string> row_names;
    std::vector<std::string> column_names;
    Matrix x;
    Labels labels;
};

/// The seven activity metrics. Scripts whose ownership metrics are undefined
/// (no surviving lines) are dropped.
FeatureMatrix activity_features(std::span<const metrics::MetricVector> table);

/// Dense token-count matrix aligned to `reference` rows; absent scripts get zeros.
FeatureMatrix bow_features(std::span<const features::BowVector> bow, const FeatureMatrix& reference);

/// Quality metrics aligned to `reference` rows; a missing script is a DataError.
FeatureMatrix quality_features(std::span<const features::CodeQualityVector> quality, const FeatureMatrix& reference);

struct PreparedFeatures {
    Matrix x;
    Eigen::Index components = 0;
    double explained = 0.0;
};

/// log1p on every column, then PCA keeping 95% of the variance.
PreparedFeatures prepare_features(const Matrix& raw);

struct FoldScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_undefined = false;  ///< no positive predictions; recorded as 0
    bool recall_undefined = false;     ///< no positives in the fold; recorded as 0
};

FoldScore score_fold(const Labels& truth, const Labels& predicted);

/// Stratified assignment of rows to `k` folds after a shuffle; every fold
/// holds floor or ceil of each class share. Returns the row indices per fold.
std::vector<std::vector<std::size_t>> stratified_folds(const Labels& labels, std::size_t k, Rng& rng);

struct CvOptions {
    int repeats = 10;
    int folds = 10;
    bool tune = false;
    int de_generations = 10;
    std::uint64_t seed = 1;
};

/// repeats x folds held-out scores, ordered by (repeat, fold).
std::vector<FoldScore> cross_validate(const Matrix& x, const Labels& y, LearnerKind learner, const CvOptions& options);

// --- differential evolution ------------------------------------------------

struct ParamBounds {
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;  ///< searched over log10
    bool integer = false;
};

struct DeOptions {
    int population = 10;
    double f = 0.75;
    double cr = 0.3;
    int generations = 10;
};

struct DeResult {
    std::vector<double> best;  ///< in parameter space (not log)
    double best_value = 0.0;
    std::size_t evaluations = 0;
};

/// DE/rand/1/bin maximizing `objective`. Mutants are clamped to the bounds.
DeResult differential_evolution(std::span<const ParamBounds> bounds,
                                const std::function<double(std::span<const double>)>& objective,
                                const DeOptions& options, Rng& rng);

std::vector<ParamBounds> search_space(LearnerKind learner);
Hyperparams decode_hyperparams(LearnerKind learner, std::span<const double> values);

/// Tunes on the given training split only; objective is the median F of an
/// inner stratified 3-fold CV.
Hyperparams de_tune(LearnerKind learner, const Matrix& x, const Labels& y, int budget, std::uint64_t seed);

// --- Scott-Knott ESD -------------------------------------------------------

struct ScottKnottOptions {
    double alpha = 0.05;
    int bootstrap = 1000;
    double min_effect = 0.147;
    std::uint64_t seed = 1;
};

struct NamedScores {
    std::string name;
    std::vector<double> values;
};

/// Rank 1 = best median. Splits need a significant bootstrap mean difference
/// and a non-negligible Cliff's delta.
std::map<std::string, int> scott_knott_rank(std::span<const NamedScores> groups, const ScottKnottOptions& options = {});

// --- comparison report -----------------------------------------------------

struct CellResult {
    std::string feature_set;
    LearnerKind learner = LearnerKind::cart;
    std::vector<FoldScore> folds;
    std::map<std::string, int> sk_rank;  ///< measure -> rank
    Eigen::Index components = 0;
};

struct EvalReport {
    std::vector<CellResult> cells;  ///< feature-set-major, learners in canonical order
    std::uint64_t seed = 0;
    bool tuned = false;
};

struct CompareOptions {
    CvOptions cv;
    std::vector<LearnerKind> learners = all_learners();
    int sk_bootstrap = 1000;
};

EvalReport compare_feature_sets(std::span<const FeatureMatrix> sets, const CompareOptions& options);

double median(std::vector<double> values);

/// `{feature_set: {learner: {precision:[...], recall:[...], f1:[...], median:{...}, sk_rank:{...}, ...}}}`
nlohmann::ordered_json report_to_json(const EvalReport& report);

const std::vector<std::string>& measure_names();

}  // namespace devminer::ml
