#include "devminer/evaluation.hpp"

#include "devminer/error.hpp"
#include "devminer/pca.hpp"
#include "devminer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace devminer::ml {

const std::vector<std::string>& measure_names() {
    static const std::vector<std::string> names{"precision", "recall", "f1"};
    return names;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ArgumentError("median of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

FeatureMatrix activity_features(std::span<const metrics::MetricVector> table) {
    FeatureMatrix fm;
    fm.name = "activity";
    fm.column_names = metrics::activity_metric_names();
    std::vector<std::vector<double>> rows;
    for (const auto& m : table) {
        std::vector<double> row;
        for (const auto& col : fm.column_names) {
            const auto v = metrics::metric_value(m, col);
            if (!v) break;
            row.push_back(*v);
        }
        if (row.size() != fm.column_names.size()) continue;
        rows.push_back(std::move(row));
        fm.row_names.push_back(m.script_path);
        fm.labels.push_back(m.is_defective);
    }
    fm.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(fm.column_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) fm.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return fm;
}

FeatureMatrix bow_features(std::span<const features::BowVector> bow, const FeatureMatrix& reference) {
    std::map<std::string, const features::BowVector*> by_script;
    for (const auto& v : bow) by_script[v.script_path] = &v;
    std::set<std::string> vocabulary;
    for (const auto& name : reference.row_names)
        if (const auto it = by_script.find(name); it != by_script.end())
            for (const auto& [token, _] : it->second->token_counts) vocabulary.insert(token);

    FeatureMatrix fm;
    fm.name = "bow";
    fm.row_names = reference.row_names;
    fm.labels = reference.labels;
    fm.column_names.assign(vocabulary.begin(), vocabulary.end());
    std::map<std::string, Eigen::Index> column;
    for (std::size_t j = 0; j < fm.column_names.size(); ++j) column[fm.column_names[j]] = static_cast<Eigen::Index>(j);
    fm.x = Matrix::Zero(static_cast<Eigen::Index>(fm.row_names.size()), static_cast<Eigen::Index>(fm.column_names.size()));
    for (std::size_t i = 0; i < fm.row_names.size(); ++i) {
        const auto it = by_script.find(fm.row_names[i]);
        if (it == by_script.end()) continue;
        for (const auto& [token, count] : it->second->token_counts)
            fm.x(static_cast<Eigen::Index>(i), column.at(token)) = static_cast<double>(count);
    }
    return fm;
}

FeatureMatrix quality_features(std::span<const features::CodeQualityVector> quality, const FeatureMatrix& reference) {
    std::map<std::string, const features::CodeQualityVector*> by_script;
    for (const auto& v : quality) by_script[v.script_path] = &v;
    FeatureMatrix fm;
    fm.name = "quality";
    fm.row_names = reference.row_names;
    fm.labels = reference.labels;
    fm.column_names = features::quality_feature_names();
    fm.x.resize(static_cast<Eigen::Index>(fm.row_names.size()), static_cast<Eigen::Index>(fm.column_names.size()));
    for (std::size_t i = 0; i < fm.row_names.size(); ++i) {
        const auto it = by_script.find(fm.row_names[i]);
        if (it == by_script.end()) throw DataError("no quality metrics for script " + fm.row_names[i]);
        const auto& q = *it->second;
        const double values[] = {static_cast<double>(q.filelength), static_cast<double>(q.complexity),
                                 static_cast<double>(q.parameters), static_cast<double>(q.execs),
                                 static_cast<double>(q.lint_warnings), static_cast<double>(q.fan_in)};
        for (Eigen::Index j = 0; j < 6; ++j) fm.x(static_cast<Eigen::Index>(i), j) = values[j];
    }
    return fm;
}

PreparedFeatures prepare_features(const Matrix& raw) {
    if (raw.size() > 0 && raw.minCoeff() < 0.0) throw ArgumentError("features must be non-negative before log1p");
    Matrix logged = raw;
    stats::log1p_inplace(logged);
    const auto pca = pca_fit(logged);
    PreparedFeatures out;
    out.x = pca_transform(pca, logged);
    out.components = pca.retained_count;
    out.explained = cumulative_explained(pca);
    return out;
}

FoldScore score_fold(const Labels& truth, const Labels& predicted) {
    if (truth.size() != predicted.size()) throw ArgumentError("truth and prediction lengths differ");
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] && truth[i]) ++tp;
        else if (predicted[i]) ++fp;
        else if (truth[i]) ++fn;
    }
    FoldScore s;
    if (tp + fp == 0) s.precision_undefined = true;
    else s.precision = tp / (tp + fp);
    if (tp + fn == 0) s.recall_undefined = true;
    else s.recall = tp / (tp + fn);
    s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

std::vector<std::vector<std::size_t>> stratified_folds(const Labels& labels, std::size_t k, Rng& rng) {
    if (k < 2) throw ArgumentError("need at least two folds");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    if (labels.size() < k) throw DataError("fewer rows than folds");
    // a class with one member would be missing from that member's training split
    if (pos.size() < 2 || neg.size() < 2) throw DataError("each class needs at least two rows for cross-validation");
    rng.shuffle(std::span<std::size_t>(pos));
    rng.shuffle(std::span<std::size_t>(neg));
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (const auto i : pos) folds[next++ % k].push_back(i);
    for (const auto i : neg) folds[next++ % k].push_back(i);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

namespace {

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Labels take_labels(const Labels& y, const std::vector<std::size_t>& rows) {
    Labels out;
    out.reserve(rows.size());
    for (const auto r : rows) out.push_back(y[r]);
    return out;
}

std::vector<std::size_t> complement(const std::vector<std::vector<std::size_t>>& folds, std::size_t held_out) {
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < folds.size(); ++f)
        if (f != held_out) out.insert(out.end(), folds[f].begin(), folds[f].end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<FoldScore> cross_validate(const Matrix& x, const Labels& y, LearnerKind learner, const CvOptions& options) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ArgumentError("feature rows and labels differ in length");
    if (options.repeats < 1 || options.folds < 2) throw ArgumentError("invalid cross-validation shape");
    const auto k = static_cast<std::size_t>(options.folds);
    if (y.size() < 2 * k) throw DataError("cross-validation needs at least " + std::to_string(2 * k) + " rows");
    std::vector<FoldScore> scores;
    scores.reserve(static_cast<std::size_t>(options.repeats) * k);
    for (int r = 0; r < options.repeats; ++r) {
        Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r), 0xF01D));
        const auto folds = stratified_folds(y, k, rng);
        for (std::size_t f = 0; f < k; ++f) {
            const auto train_rows = complement(folds, f);
            const Matrix xtr = take_rows(x, train_rows);
            const Labels ytr = take_labels(y, train_rows);
            const std::uint64_t fold_seed = derive_seed(options.seed, static_cast<std::uint64_t>(r), f + 1);
            const Hyperparams params = options.tune ? de_tune(learner, xtr, ytr, options.de_generations, fold_seed)
                                                    : default_hyperparams(learner);
            const Model model = train(params, xtr, ytr, fold_seed);
            scores.push_back(score_fold(take_labels(y, folds[f]), predict(model, take_rows(x, folds[f]))));
        }
    }
    return scores;
}

DeResult differential_evolution(std::span<const ParamBounds> bounds,
                                const std::function<double(std::span<const double>)>& objective,
                                const DeOptions& options, Rng& rng) {
    if (options.generations < 1) throw ArgumentError("DE budget must be at least one generation");
    if (options.population < 4) throw ArgumentError("DE population must be at least 4");
    if (bounds.empty()) throw ArgumentError("DE needs at least one parameter");
    const std::size_t dim = bounds.size();
    const auto np = static_cast<std::size_t>(options.population);

    // search coordinates: log10 for log-scaled parameters
    auto lo = [&](std::size_t j) { return bounds[j].log_scale ? std::log10(bounds[j].lo) : bounds[j].lo; };
    auto hi = [&](std::size_t j) { return bounds[j].log_scale ? std::log10(bounds[j].hi) : bounds[j].hi; };
    auto to_params = [&](const std::vector<double>& v) {
        std::vector<double> p(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            double value = bounds[j].log_scale ? std::pow(10.0, v[j]) : v[j];
            if (bounds[j].integer) value = std::round(value);
            p[j] = std::clamp(value, bounds[j].lo, bounds[j].hi);
        }
        return p;
    };

    DeResult result;
    std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
    std::vector<double> fitness(np);
    for (auto& member : pop)
        for (std::size_t j = 0; j < dim; ++j) member[j] = rng.uniform(lo(j), hi(j));
    for (std::size_t i = 0; i < np; ++i) {
        fitness[i] = objective(to_params(pop[i]));
        ++result.evaluations;
    }

    for (int g = 0; g < options.generations; ++g) {
        for (std::size_t i = 0; i < np; ++i) {
            std::size_t a, b, c;
            do a = rng.index(np); while (a == i);
            do b = rng.index(np); while (b == i || b == a);
            do c = rng.index(np); while (c == i || c == a || c == b);
            const std::size_t forced = rng.index(dim);
            std::vector<double> trial = pop[i];
            for (std::size_t j = 0; j < dim; ++j) {
                if (j == forced || rng.uniform() < options.cr) {
                    const double mutant = pop[a][j] + options.f * (pop[b][j] - pop[c][j]);
                    trial[j] = std::clamp(mutant, lo(j), hi(j));
                }
            }
            const double value = objective(to_params(trial));
            ++result.evaluations;
            if (value >= fitness[i]) {
                pop[i] = std::move(trial);
                fitness[i] = value;
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::max_element(fitness.begin(), fitness.end()) - fitness.begin());
    result.best = to_params(pop[best]);
    result.best_value = fitness[best];
    return result;
}

std::vector<ParamBounds> search_space(LearnerKind learner) {
    switch (learner) {
        case LearnerKind::cart: return {{1, 20, false, true}, {2, 20, false, true}};
        case LearnerKind::rf: return {{10, 150, false, true}, {0.1, 1.0, false, false}};
        case LearnerKind::lr: return {{1e-4, 1e2, true, false}};
        case LearnerKind::nb: return {{1e-12, 1e-3, true, false}};
    }
    return {};
}

Hyperparams decode_hyperparams(LearnerKind learner, std::span<const double> v) {
    switch (learner) {
        case LearnerKind::cart: return CartParams{static_cast<int>(v[0]), static_cast<int>(v[1])};
        case LearnerKind::rf: {
            RfParams p;
            p.n_trees = static_cast<int>(v[0]);
            p.feature_fraction = v[1];
            return p;
        }
        case LearnerKind::lr: {
            LrParams p;
            p.l2 = v[0];
            return p;
        }
        case LearnerKind::nb: return NbParams{v[0]};
    }
    return CartParams{};
}

Hyperparams de_tune(LearnerKind learner, const Matrix& x, const Labels& y, int budget, std::uint64_t seed) {
    if (budget < 1) throw ArgumentError("DE budget must be at least one generation");
    constexpr std::size_t kInnerFolds = 3;
    const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), true));
    if (pos < kInnerFolds || y.size() - pos < kInnerFolds || y.size() < 2 * kInnerFolds) return default_hyperparams(learner);

    Rng fold_rng(derive_seed(seed, 0x1A, 0));
    const auto folds = stratified_folds(y, kInnerFolds, fold_rng);
    std::vector<Matrix> xtr, xte;
    std::vector<Labels> ytr, yte;
    for (std::size_t f = 0; f < kInnerFolds; ++f) {
        const auto rows = complement(folds, f);
        xtr.push_back(take_rows(x, rows));
        ytr.push_back(take_labels(y, rows));
        xte.push_back(take_rows(x, folds[f]));
        yte.push_back(take_labels(y, folds[f]));
    }
    const auto objective = [&](std::span<const double> values) {
        const Hyperparams params = decode_hyperparams(learner, values);
        std::vector<double> f1;
        for (std::size_t f = 0; f < kInnerFolds; ++f) {
            const Model m = train(params, xtr[f], ytr[f], derive_seed(seed, 0x1B, f));
            f1.push_back(score_fold(yte[f], predict(m, xte[f])).f1);
        }
        return median(std::move(f1));
    };
    const auto space = search_space(learner);
    DeOptions options;
    options.generations = budget;
    Rng rng(derive_seed(seed, 0xDE, 0));
    const auto best = differential_evolution(space, objective, options, rng);
    return decode_hyperparams(learner, best.best);
}

namespace {

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

/// Two-sample bootstrap test of equal means (both samples shifted to the
/// pooled mean under the null); returns the p-value.
double bootstrap_mean_test(const std::vector<double>& a, const std::vector<double>& b, int resamples, Rng& rng) {
    const double observed = std::fabs(mean_of(a) - mean_of(b));
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double grand = mean_of(pooled);
    const double shift_a = grand - mean_of(a), shift_b = grand - mean_of(b);
    int extreme = 0;
    for (int r = 0; r < resamples; ++r) {
        double sa = 0.0, sb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sa += a[rng.index(a.size())] + shift_a;
        for (std::size_t i = 0; i < b.size(); ++i) sb += b[rng.index(b.size())] + shift_b;
        const double diff = std::fabs(sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size()));
        // tolerance keeps round-off in the shifted sums from counting as extreme
        if (diff >= observed - 1e-12 * std::max(1.0, observed)) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(resamples);
}

struct SkGroup {
    std::size_t original;
    std::vector<double> values;
    double median;
    double mean;
};

void sk_split(const std::vector<SkGroup>& groups, std::size_t lo, std::size_t hi, const ScottKnottOptions& options,
              std::vector<int>& rank_of, int& next_rank) {
    auto assign_all = [&] {
        for (std::size_t i = lo; i < hi; ++i) rank_of[groups[i].original] = next_rank;
        ++next_rank;
    };
    if (hi - lo < 2) {
        assign_all();
        return;
    }
    auto pooled = [&](std::size_t from, std::size_t to) {
        std::vector<double> out;
        for (std::size_t i = from; i < to; ++i) out.insert(out.end(), groups[i].values.begin(), groups[i].values.end());
        return out;
    };
    const auto all = pooled(lo, hi);
    const double grand = mean_of(all);
    std::size_t best_cut = lo + 1;
    double best_ss = -1.0;
    for (std::size_t cut = lo + 1; cut < hi; ++cut) {
        const auto left = pooled(lo, cut), right = pooled(cut, hi);
        const double ml = mean_of(left), mr = mean_of(right);
        const double ss = static_cast<double>(left.size()) * (ml - grand) * (ml - grand) +
                          static_cast<double>(right.size()) * (mr - grand) * (mr - grand);
        if (ss > best_ss) {
            best_ss = ss;
            best_cut = cut;
        }
    }
    const auto left = pooled(lo, best_cut), right = pooled(best_cut, hi);
    Rng rng(derive_seed(options.seed, lo, hi));
    const double p = bootstrap_mean_test(left, right, options.bootstrap, rng);
    const double delta = std::fabs(stats::cliffs_delta_value(left, right));
    if (p < options.alpha && delta >= options.min_effect) {
        sk_split(groups, lo, best_cut, options, rank_of, next_rank);
        sk_split(groups, best_cut, hi, options, rank_of, next_rank);
    } else {
        assign_all();
    }
}

}  // namespace

std::map<std::string, int> scott_knott_rank(std::span<const NamedScores> groups, const ScottKnottOptions& options) {
    std::vector<SkGroup> sorted;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].values.empty()) throw ArgumentError("Scott-Knott: group '" + groups[i].name + "' is empty");
        sorted.push_back({i, groups[i].values, median(groups[i].values), mean_of(groups[i].values)});
    }
    std::stable_sort(sorted.begin(), sorted.end(), [](const SkGroup& a, const SkGroup& b) {
        if (a.median != b.median) return a.median > b.median;
        return a.mean > b.mean;
    });
    std::vector<int> rank_of(groups.size(), 1);
    int next_rank = 1;
    if (!sorted.empty()) sk_split(sorted, 0, sorted.size(), options, rank_of, next_rank);
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < groups.size(); ++i) out[groups[i].name] = rank_of[i];
    return out;
}

EvalReport compare_feature_sets(std::span<const FeatureMatrix> sets, const CompareOptions& options) {
    EvalReport report;
    report.seed = options.cv.seed;
    report.tuned = options.cv.tune;
    for (const auto& set : sets) {
        const auto prepared = prepare_features(set.x);
        for (const auto learner : options.learners) {
            CellResult cell;
            cell.feature_set = set.name;
            cell.learner = learner;
            cell.components = prepared.components;
            cell.folds = cross_validate(prepared.x, set.labels, learner, options.cv);
            report.cells.push_back(std::move(cell));
        }
    }
    for (std::size_t m = 0; m < measure_names().size(); ++m) {
        std::vector<NamedScores> groups;
        for (const auto& cell : report.cells) {
            NamedScores g{cell.feature_set + "/" + std::string(to_string(cell.learner)), {}};
            for (const auto& f : cell.folds) g.values.push_back(m == 0 ? f.precision : m == 1 ? f.recall : f.f1);
            groups.push_back(std::move(g));
        }
        ScottKnottOptions sk;
        sk.bootstrap = options.sk_bootstrap;
        sk.seed = derive_seed(options.cv.seed, 0x5C077, m);
        const auto ranks = scott_knott_rank(groups, sk);
        for (std::size_t c = 0; c < report.cells.size(); ++c) report.cells[c].sk_rank[measure_names()[m]] = ranks.at(groups[c].name);
    }
    return report;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& cell : report.cells) {
        nlohmann::ordered_json c;
        std::vector<double> p, r, f;
        int undefined_p = 0, undefined_r = 0;
        for (const auto& s : cell.folds) {
            p.push_back(s.precision);
            r.push_back(s.recall);
            f.push_back(s.f1);
            undefined_p += s.precision_undefined ? 1 : 0;
            undefined_r += s.recall_undefined ? 1 : 0;
        }
        c["precision"] = p;
        c["recall"] = r;
        c["f1"] = f;
        c["median"] = {{"precision", median(p)}, {"recall", median(r)}, {"f1", median(f)}};
        nlohmann::ordered_json ranks;
        for (const auto& m : measure_names()) ranks[m] = cell.sk_rank.at(m);
        c["sk_rank"] = ranks;
        c["undefined_folds"] = {{"precision", undefined_p}, {"recall", undefined_r}};
        c["components"] = cell.components;
        out[cell.feature_set][std::string(to_string(cell.learner))] = std::move(c);
    }
    return out;
}

}  // namespace devminer::ml
