#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace devminer::ml {

using Matrix = Eigen::MatrixXd;
using Labels = std::vector<bool>;

enum class LearnerKind { cart, lr, nb, rf };

std::string_view to_string(LearnerKind k);
LearnerKind parse_learner(std::string_view name);
const std::vector<LearnerKind>& all_learners();

struct CartParams {
    int max_depth = 0;  ///< 0 = unbounded
    int min_split = 2;
};

struct LrParams {
    double l2 = 1.0;
    int max_iter = 300;
};

struct NbParams {
    double var_smoothing = 1e-9;  ///< scaled by the largest feature variance
};

struct RfParams {
    int n_trees = 50;
    std::optional<double> feature_fraction;  ///< features tried per node; empty = sqrt(d)
    bool bootstrap = true;
    CartParams tree;
};

using Hyperparams = std::variant<CartParams, LrParams, NbParams, RfParams>;

Hyperparams default_hyperparams(LearnerKind k);
LearnerKind kind_of(const Hyperparams& p);

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;  ///< value <= threshold
    int right = -1;
    double positive_rate = 0.0;
};

struct CartModel {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
};

struct LrModel {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;
    Eigen::VectorXd weights;
    double bias = 0.0;
};

struct NbModel {
    Eigen::RowVectorXd mean[2];
    Eigen::RowVectorXd var[2];
    double log_prior[2] = {0.0, 0.0};
};

struct RfModel {
    std::vector<CartModel> trees;
};

using Model = std::variant<CartModel, LrModel, NbModel, RfModel>;

/// Fits the learner selected by the hyperparameter alternative. `seed` drives
/// the random forest's bootstrap and feature sampling. Throws TrainingError
/// when a class is absent.
Model train(const Hyperparams& params, const Matrix& x, const Labels& y, std::uint64_t seed = 0);

/// true = defective.
Labels predict(const Model& model, const Matrix& x);

/// P(defective) per row; tree ensembles give the vote share.
Eigen::VectorXd predict_score(const Model& model, const Matrix& x);

}  // namespace devminer::ml
