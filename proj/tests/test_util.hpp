#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "kkm/clustering.hpp"
#include "kkm/kernel.hpp"
#include "kkm/rng.hpp"

namespace kkm::test {

inline PointSet random_points(std::size_t n, int dim, Rng& rng, double scale = 1.0) {
    PointSet x(static_cast<Eigen::Index>(n), dim);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = scale * rng.normal();
    return x;
}

inline GramMatrix random_gaussian_gram(std::size_t n, Rng& rng, int dim = 2, double bandwidth = 1.0) {
    return gram_matrix(KernelSpec::gaussian(bandwidth), random_points(n, dim, rng));
}

// Explicit feature coordinates: rows of V sqrt(Lambda), so Phi Phi^T = K.
inline Matrix eigen_embedding(const GramMatrix& K) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(K.entries());
    const Vector lambda = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

// Mean squared distance to explicit cluster centroids.
inline double embedding_cost(const Matrix& phi, const std::vector<int>& labels, int k) {
    Matrix sums = Matrix::Zero(k, phi.cols());
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        sums.row(labels[i]) += phi.row(static_cast<Eigen::Index>(i));
        counts[static_cast<std::size_t>(labels[i])] += 1.0;
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto c = sums.row(labels[i]) / counts[static_cast<std::size_t>(labels[i])];
        cost += (phi.row(static_cast<Eigen::Index>(i)) - c).squaredNorm();
    }
    return cost / static_cast<double>(labels.size());
}

// Blobs centered at 0 and (separation, 0, ...), alternating membership.
inline std::pair<PointSet, std::vector<int>> two_blobs(std::size_t n, Rng& rng, double separation = 1.0,
                                                       double spread = 0.1, int dim = 2) {
    PointSet x(static_cast<Eigen::Index>(n), dim);
    std::vector<int> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
        truth[i] = static_cast<int>(i % 2);
        for (int j = 0; j < dim; ++j)
            x(static_cast<Eigen::Index>(i), j) = (j == 0 ? separation * truth[i] : 0.0) + spread * rng.normal();
    }
    return {x, truth};
}

inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    return canonical_labels(a) == canonical_labels(b);
}

// Uniform labels conditioned on every cluster being nonempty (k <= n).
inline std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
    std::vector<int> labels(n);
    while (true) {
        std::vector<int> seen(static_cast<std::size_t>(k), 0);
        for (auto& l : labels) seen[static_cast<std::size_t>(l = static_cast<int>(rng.index(static_cast<std::size_t>(k))))] = 1;
        if (std::find(seen.begin(), seen.end(), 0) == seen.end()) return labels;
    }
}

}  // namespace kkm::test
