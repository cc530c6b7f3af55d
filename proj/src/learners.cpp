#include "devminer/learners.hpp"

#include "devminer/error.hpp"
#include "devminer/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace devminer::ml {

std::string_view to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::cart: return "CART";
        case LearnerKind::lr: return "LR";
        case LearnerKind::nb: return "NB";
        case LearnerKind::rf: return "RF";
    }
    return "CART";
}

LearnerKind parse_learner(std::string_view name) {
    for (const auto k : all_learners()) {
        std::string upper(name);
        std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        if (upper == to_string(k)) return k;
    }
    throw ArgumentError("unknown learner '" + std::string(name) + "'");
}

const std::vector<LearnerKind>& all_learners() {
    static const std::vector<LearnerKind> kinds{LearnerKind::cart, LearnerKind::lr, LearnerKind::nb, LearnerKind::rf};
    return kinds;
}

Hyperparams default_hyperparams(LearnerKind k) {
    switch (k) {
        case LearnerKind::cart: return CartParams{};
        case LearnerKind::lr: return LrParams{};
        case LearnerKind::nb: return NbParams{};
        case LearnerKind::rf: return RfParams{};
    }
    return CartParams{};
}

LearnerKind kind_of(const Hyperparams& p) { return static_cast<LearnerKind>(p.index()); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_both_classes(const Matrix& x, const Labels& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ArgumentError("feature rows and labels differ in length");
    const auto pos = std::count(y.begin(), y.end(), true);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size()))
        throw TrainingError("training data contains a single class");
}

// --- CART ------------------------------------------------------------------

struct TreeBuilder {
    const Matrix& x;
    const Labels& y;
    CartParams params;
    int features_per_node;  ///< == cols means every feature, in column order
    Rng* rng;
    CartModel model;

    static double gini(double pos, double total) {
        if (total <= 0.0) return 0.0;
        const double p = pos / total;
        return 2.0 * p * (1.0 - p);
    }

    std::vector<int> candidate_features() {
        const int d = static_cast<int>(x.cols());
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        if (features_per_node >= d || rng == nullptr) return all;
        // partial Fisher-Yates, then restore column order for deterministic ties
        for (int i = 0; i < features_per_node; ++i) {
            const auto j = static_cast<int>(rng->between(static_cast<std::size_t>(i), static_cast<std::size_t>(d - 1)));
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        all.resize(static_cast<std::size_t>(features_per_node));
        std::sort(all.begin(), all.end());
        return all;
    }

    int grow(std::vector<int>& rows, int depth) {
        const int node_index = static_cast<int>(model.nodes.size());
        model.nodes.emplace_back();
        const double total = static_cast<double>(rows.size());
        double pos = 0.0;
        for (int r : rows) pos += y[static_cast<std::size_t>(r)] ? 1.0 : 0.0;
        model.nodes[static_cast<std::size_t>(node_index)].positive_rate = pos / total;

        const bool pure = pos == 0.0 || pos == total;
        const bool depth_reached = params.max_depth > 0 && depth >= params.max_depth;
        if (pure || depth_reached || static_cast<int>(rows.size()) < std::max(2, params.min_split)) return node_index;

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = std::numeric_limits<double>::infinity();
        std::vector<int> order(rows);
        for (const int f : candidate_features()) {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double va = x(a, f), vb = x(b, f);
                return va < vb || (va == vb && a < b);
            });
            double left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                left_pos += y[static_cast<std::size_t>(order[i])] ? 1.0 : 0.0;
                const double v = x(order[i], f), v_next = x(order[i + 1], f);
                if (v == v_next) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = total - nl;
                const double impurity = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / total;
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = f;
                    best_threshold = v + (v_next - v) / 2.0;
                }
            }
        }
        if (best_feature < 0) return node_index;

        std::vector<int> left, right;
        for (int r : rows) (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(left, depth + 1);
        const int rgt = grow(right, depth + 1);
        auto& node = model.nodes[static_cast<std::size_t>(node_index)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = rgt;
        return node_index;
    }
};

CartModel fit_tree(const Matrix& x, const Labels& y, const std::vector<int>& rows, const CartParams& params,
                   int features_per_node, Rng* rng) {
    TreeBuilder b{x, y, params, features_per_node, rng, {}};
    std::vector<int> r(rows);
    b.grow(r, 0);
    return std::move(b.model);
}

double tree_score(const CartModel& m, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    int i = 0;
    while (m.nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = m.nodes[static_cast<std::size_t>(i)];
        i = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return m.nodes[static_cast<std::size_t>(i)].positive_rate;
}

std::vector<int> all_rows(const Matrix& x) {
    std::vector<int> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

// --- logistic regression ---------------------------------------------------

double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }
double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

LrModel fit_lr(const Matrix& x, const Labels& y, const LrParams& params) {
    if (!(params.l2 >= 0.0)) throw ArgumentError("LR: L2 strength must be non-negative");
    LrModel m;
    m.mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - m.mean;
    m.scale = (centered.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
    for (Eigen::Index j = 0; j < m.scale.size(); ++j)
        if (m.scale(j) <= 0.0) m.scale(j) = 1.0;
    const Matrix z = centered.array().rowwise() / m.scale.array();
    Eigen::VectorXd t(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) t(i) = y[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

    // penalized mean log-likelihood; the bias is not penalized
    const double n = static_cast<double>(x.rows());
    auto objective = [&](const Eigen::VectorXd& w, double b) {
        const Eigen::VectorXd eta = (z * w).array() + b;
        double ll = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i) ll += t(i) * log_sigmoid(eta(i)) + (1.0 - t(i)) * log_sigmoid(-eta(i));
        return ll / n - 0.5 * params.l2 / n * w.squaredNorm();
    };
    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
    double b = 0.0;
    double value = objective(w, b);
    double step = 1.0;
    for (int iter = 0; iter < params.max_iter; ++iter) {
        Eigen::VectorXd residual = (z * w).array() + b;
        residual = residual.unaryExpr([](double e) { return sigmoid(e); });
        residual = t - residual;
        const Eigen::VectorXd gw = z.transpose() * residual / n - params.l2 / n * w;
        const double gb = residual.sum() / n;
        const double gnorm2 = gw.squaredNorm() + gb * gb;
        if (gnorm2 < 1e-16) break;
        // backtracking (Armijo) on the ascent direction
        step = std::min(step * 2.0, 64.0);
        bool improved = false;
        while (step > 1e-10) {
            const Eigen::VectorXd w_new = w + step * gw;
            const double b_new = b + step * gb;
            const double v_new = objective(w_new, b_new);
            if (v_new >= value + 1e-4 * step * gnorm2) {
                w = w_new;
                b = b_new;
                improved = v_new - value > 1e-12;
                value = v_new;
                break;
            }
            step /= 2.0;
        }
        if (!improved) break;
    }
    m.weights = w;
    m.bias = b;
    return m;
}

// --- Gaussian naive Bayes --------------------------------------------------

NbModel fit_nb(const Matrix& x, const Labels& y, const NbParams& params) {
    NbModel m;
    const Eigen::RowVectorXd overall_mean = x.colwise().mean();
    const double max_var =
        ((x.rowwise() - overall_mean).colwise().squaredNorm() / static_cast<double>(x.rows())).maxCoeff();
    double epsilon = params.var_smoothing * max_var;
    if (epsilon <= 0.0) epsilon = std::max(params.var_smoothing, 1e-300);
    for (int c = 0; c < 2; ++c) {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            if (y[static_cast<std::size_t>(i)] == (c == 1)) rows.push_back(i);
        const Matrix sub = x(rows, Eigen::all);
        m.mean[c] = sub.colwise().mean();
        m.var[c] = ((sub.rowwise() - m.mean[c]).colwise().squaredNorm() / static_cast<double>(rows.size())).array() + epsilon;
        m.log_prior[c] = std::log(static_cast<double>(rows.size()) / static_cast<double>(x.rows()));
    }
    return m;
}

Eigen::VectorXd nb_log_odds(const NbModel& m, const Matrix& x) {
    Eigen::VectorXd out(x.rows());
    constexpr double kLog2Pi = 1.8378770664093453;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double ll[2];
        for (int c = 0; c < 2; ++c) {
            const Eigen::ArrayXd diff = (x.row(i) - m.mean[c]).array().transpose();
            const Eigen::ArrayXd var = m.var[c].array().transpose();
            ll[c] = m.log_prior[c] - 0.5 * (kLog2Pi * static_cast<double>(var.size()) + var.log().sum() + (diff.square() / var).sum());
        }
        out(i) = ll[1] - ll[0];
    }
    return out;
}

}  // namespace

Model train(const Hyperparams& params, const Matrix& x, const Labels& y, std::uint64_t seed) {
    require_both_classes(x, y);
    return std::visit(
        overloaded{
            [&](const CartParams& p) -> Model {
                return fit_tree(x, y, all_rows(x), p, static_cast<int>(x.cols()), nullptr);
            },
            [&](const LrParams& p) -> Model { return fit_lr(x, y, p); },
            [&](const NbParams& p) -> Model { return fit_nb(x, y, p); },
            [&](const RfParams& p) -> Model {
                if (p.n_trees < 1) throw ArgumentError("RF: need at least one tree");
                const int d = static_cast<int>(x.cols());
                const double wanted = p.feature_fraction ? *p.feature_fraction * d : std::sqrt(static_cast<double>(d));
                const int per_node = std::clamp(static_cast<int>(std::lround(wanted)), 1, d);
                RfModel rf;
                rf.trees.reserve(static_cast<std::size_t>(p.n_trees));
                for (int t = 0; t < p.n_trees; ++t) {
                    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t), 0x7ee5));
                    std::vector<int> rows;
                    if (p.bootstrap) {
                        rows.resize(static_cast<std::size_t>(x.rows()));
                        for (auto& r : rows) r = static_cast<int>(rng.index(static_cast<std::size_t>(x.rows())));
                    } else {
                        rows = all_rows(x);
                    }
                    rf.trees.push_back(fit_tree(x, y, rows, p.tree, per_node, &rng));
                }
                return rf;
            },
        },
        params);
}

Eigen::VectorXd predict_score(const Model& model, const Matrix& x) {
    return std::visit(
        overloaded{
            [&](const CartModel& m) -> Eigen::VectorXd {
                Eigen::VectorXd s(x.rows());
                for (Eigen::Index i = 0; i < x.rows(); ++i) s(i) = tree_score(m, x.row(i));
                return s;
            },
            [&](const LrModel& m) -> Eigen::VectorXd {
                const Matrix z = (x.rowwise() - m.mean).array().rowwise() / m.scale.array();
                Eigen::VectorXd eta = (z * m.weights).array() + m.bias;
                return eta.unaryExpr([](double e) { return sigmoid(e); });
            },
            [&](const NbModel& m) -> Eigen::VectorXd {
                return nb_log_odds(m, x).unaryExpr([](double e) { return sigmoid(e); });
            },
            [&](const RfModel& m) -> Eigen::VectorXd {
                Eigen::VectorXd votes = Eigen::VectorXd::Zero(x.rows());
                for (const auto& tree : m.trees)
                    for (Eigen::Index i = 0; i < x.rows(); ++i) votes(i) += tree_score(tree, x.row(i)) > 0.5 ? 1.0 : 0.0;
                return votes / static_cast<double>(m.trees.size());
            },
        },
        model);
}

Labels predict(const Model& model, const Matrix& x) {
    Labels out(static_cast<std::size_t>(x.rows()));
    if (const auto* nb = std::get_if<NbModel>(&model)) {
        // compare log posteriors directly; the sigmoid saturates
        const Eigen::VectorXd odds = nb_log_odds(*nb, x);
        for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = odds(i) > 0.0;
        return out;
    }
    const Eigen::VectorXd s = predict_score(model, x);
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = s(i) > 0.5;
    return out;
}

}  // namespace devminer::ml
