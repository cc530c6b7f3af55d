#pragma once

#include "devminer/error.hpp"

#include <Eigen/Dense>

#include <vector>

namespace devminer::ml {

inline constexpr double kPcaVarianceTarget = 0.95;

template <typename Scalar>
struct PcaModel {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

    RowVector mean;
    Matrix components;  ///< d x k, orthonormal columns, by decreasing variance
    Eigen::Index retained_count = 0;
    std::vector<Scalar> explained_variance_ratio;  ///< all components, descending
};

/// Covariance eigendecomposition of the centered rows of `x`; keeps the
/// smallest k whose cumulative explained variance reaches `target`. When there
/// are more features than rows the n x n Gram matrix is decomposed instead.
template <typename Derived>
PcaModel<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& x,
                                           typename Derived::Scalar target = kPcaVarianceTarget) {
    using Scalar = typename Derived::Scalar;
    using Model = PcaModel<Scalar>;
    using Matrix = typename Model::Matrix;
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n < 2) throw ArgumentError("PCA needs at least two rows");

    Model model;
    model.mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - model.mean;

    Matrix basis;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;
    if (d <= n) {
        const Matrix cov = (centered.transpose() * centered) / static_cast<Scalar>(n - 1);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
        eigenvalues = solver.eigenvalues().reverse();
        basis = solver.eigenvectors().rowwise().reverse();
    } else {
        const Matrix gram = (centered * centered.transpose()) / static_cast<Scalar>(n - 1);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
        eigenvalues = solver.eigenvalues().reverse();
        const Matrix u = solver.eigenvectors().rowwise().reverse();
        basis = Matrix::Zero(d, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (eigenvalues(j) <= Scalar(0)) continue;
            basis.col(j) = centered.transpose() * u.col(j);
            basis.col(j).normalize();
        }
    }
    eigenvalues = eigenvalues.cwiseMax(Scalar(0));
    const Scalar total = eigenvalues.sum();
    const Scalar scale = centered.cwiseAbs().maxCoeff();
    if (!(total > Scalar(0)) || scale == Scalar(0)) throw DegenerateError("PCA: input has zero variance");

    model.explained_variance_ratio.resize(static_cast<std::size_t>(eigenvalues.size()));
    Scalar cumulative = 0;
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
        const Scalar ratio = eigenvalues(j) / total;
        model.explained_variance_ratio[static_cast<std::size_t>(j)] = ratio;
        if (model.retained_count == 0) {
            cumulative += ratio;
            if (cumulative >= target) model.retained_count = j + 1;
        }
    }
    if (model.retained_count == 0) model.retained_count = eigenvalues.size();
    model.components = basis.leftCols(model.retained_count);
    return model;
}

/// Projects rows of `x` onto the retained components.
template <typename Scalar, typename Derived>
typename PcaModel<Scalar>::Matrix pca_transform(const PcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
    return (x.rowwise() - model.mean) * model.components;
}

/// Maps reduced coordinates back to the original feature space.
template <typename Scalar, typename Derived>
typename PcaModel<Scalar>::Matrix pca_inverse(const PcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& z) {
    return (z * model.components.transpose()).rowwise() + model.mean;
}

template <typename Scalar>
Scalar cumulative_explained(const PcaModel<Scalar>& model) {
    Scalar s = 0;
    for (Eigen::Index j = 0; j < model.retained_count; ++j) s += model.explained_variance_ratio[static_cast<std::size_t>(j)];
    return s;
}

}  // namespace devminer::ml
