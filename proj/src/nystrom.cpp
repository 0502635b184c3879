#include "kkm/nystrom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "kkm/csv.hpp"
#include "kkm/detail/kmeanspp.hpp"

namespace kkm {

namespace {

constexpr double kEigenCutoff = 1e-10;

struct EuclideanState {
    Matrix centers;
    Matrix dist;
};

EuclideanState euclidean_state(const Matrix& points, const std::vector<int>& labels, int k,
                               const std::vector<double>& w) {
    const Eigen::Index n = points.rows();
    EuclideanState s{Matrix::Zero(k, points.cols()), Matrix(n, k)};
    Vector mass = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        s.centers.row(labels[i]) += w[i] * points.row(i);
        mass(labels[i]) += w[i];
    }
    for (int j = 0; j < k; ++j) {
        if (mass(j) > 0.0) {
            s.centers.row(j) /= mass(j);
            for (Eigen::Index i = 0; i < n; ++i) s.dist(i, j) = (points.row(i) - s.centers.row(j)).squaredNorm();
        } else {
            s.dist.col(j).setConstant(std::numeric_limits<double>::infinity());
        }
    }
    return s;
}

double weighted_cost(const Matrix& dist, const std::vector<int>& labels, const std::vector<double>& w) {
    double cost = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) cost += w[i] * dist(static_cast<Eigen::Index>(i), labels[i]);
    return cost;
}

Assignment nearest_center_partition(const Matrix& points, const std::vector<std::size_t>& centers) {
    const Eigen::Index n = points.rows();
    const int k = static_cast<int>(centers.size());
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const double d = (points.row(i) - points.row(static_cast<Eigen::Index>(centers[j]))).squaredNorm();
            if (d < best) {
                best = d;
                labels[i] = j;
            }
        }
    }
    for (int j = 0; j < k; ++j) labels[centers[j]] = j;
    return Assignment(std::move(labels), k);
}

double mean_residual(const EmbeddedDataset& e, const std::vector<double>& w) {
    double r = 0.0;
    for (Eigen::Index i = 0; i < e.residuals.size(); ++i) r += w[i] * e.residuals(i);
    return r;
}

}  // namespace

LandmarkSet::LandmarkSet(std::vector<std::size_t> indices, std::size_t n) : indices_(std::move(indices)) {
    if (indices_.empty()) throw Error(ErrorCode::InvalidArgument, "landmark set is empty");
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
        throw Error(ErrorCode::InvalidArgument, "landmark indices must be distinct");
    if (indices_.back() >= n) throw Error(ErrorCode::IndexOutOfRange, "landmark index out of range");
}

LandmarkSet sample_landmarks_uniform(std::size_t n, std::size_t m, Rng& rng) {
    if (m < 1 || m > n) throw Error(ErrorCode::MTooLarge, "landmark count must satisfy 1 <= m <= n");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) std::swap(perm[i], perm[i + rng.index(n - i)]);
    perm.resize(m);
    return LandmarkSet(std::move(perm), n);
}

std::string to_string(LandmarkMode mode) {
    switch (mode) {
        case LandmarkMode::General: return "general";
        case LandmarkMode::Eigendecay: return "eigendecay";
        case LandmarkMode::LinearK: return "linear_k";
    }
    return "unknown";
}

LandmarkMode parse_landmark_mode(const std::string& name) {
    if (name == "general") return LandmarkMode::General;
    if (name == "eigendecay") return LandmarkMode::Eigendecay;
    if (name == "linear_k") return LandmarkMode::LinearK;
    throw Error(ErrorCode::Config, "unknown landmark mode '" + name + "'");
}

std::size_t landmark_size(std::size_t n, int k, double delta, std::optional<double> xi, LandmarkMode mode,
                          double c_scale) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidDelta, "delta must lie in (0, 1)");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "cluster count must be >= 1");
    if (!(c_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "c_scale must be positive");
    if (mode != LandmarkMode::Eigendecay && !xi)
        throw Error(ErrorCode::MissingXi, "effective dimension is required for mode " + to_string(mode));

    const double kd = static_cast<double>(k);
    double m = c_scale * std::sqrt(static_cast<double>(n)) * std::log(1.0 / delta);
    if (mode == LandmarkMode::General) m *= std::min(kd, *xi) / std::sqrt(kd);
    if (mode == LandmarkMode::LinearK) m *= std::min(kd, *xi) / kd;

    // Absorb round-off so that an exact integer (e.g. delta = e^-1) is not
    // pushed to the next one by the last ulp.
    const double rounded = std::ceil(m * (1.0 - 1e-12));
    if (!(rounded >= 1.0)) return 1;
    return std::min(n, static_cast<std::size_t>(rounded));
}

void EmbeddedDataset::write_csv(std::ostream& out) const {
    for (Eigen::Index j = 0; j < coords.cols(); ++j) out << 'z' << j << ',';
    out << "residual\n";
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        for (Eigen::Index j = 0; j < coords.cols(); ++j) out << format_real(coords(i, j)) << ',';
        out << format_real(residuals(i)) << '\n';
    }
}

EmbeddedDataset nystrom_embed(const GramMatrix& K, const LandmarkSet& landmarks, double jitter) {
    if (!(jitter >= 0.0)) throw Error(ErrorCode::InvalidArgument, "jitter must be >= 0");
    const auto& idx = landmarks.indices();
    if (idx.back() >= K.size()) throw Error(ErrorCode::IndexOutOfRange, "landmark index out of range");
    const auto n = static_cast<Eigen::Index>(K.size());
    const auto m = static_cast<Eigen::Index>(idx.size());

    Matrix kmm(m, m);
    Matrix knm(n, m);
    for (Eigen::Index b = 0; b < m; ++b) {
        knm.col(b) = K.entries().col(static_cast<Eigen::Index>(idx[b]));
        for (Eigen::Index a = 0; a < m; ++a) kmm(a, b) = K(idx[a], idx[b]);
    }
    kmm.diagonal().array() += jitter;

    Eigen::SelfAdjointEigenSolver<Matrix> solver(kmm);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::SpectralFailure, "landmark block eigen-decomposition did not converge");
    const Vector& lambda = solver.eigenvalues();
    const double cutoff = kEigenCutoff * std::max(lambda.maxCoeff(), 0.0);

    Vector inv_sqrt = Vector::Zero(m);
    Eigen::Index rank = 0;
    for (Eigen::Index r = 0; r < m; ++r) {
        if (lambda(r) > cutoff && lambda(r) > 0.0) {
            inv_sqrt(r) = 1.0 / std::sqrt(lambda(r));
            ++rank;
        }
    }

    EmbeddedDataset e;
    e.jitter = jitter;
    e.rank = rank;
    e.rank_deficient = rank < m;
    const Matrix& u = solver.eigenvectors();
    e.basis = u * inv_sqrt.asDiagonal() * u.transpose();
    e.coords = knm * e.basis;
    e.residuals = (K.diag() - e.coords.rowwise().squaredNorm()).cwiseMax(0.0);
    return e;
}

NystromResult euclidean_lloyd(const Matrix& points, const Assignment& init, const LloydOptions& options,
                              Weights weights) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (init.size() != n) throw Error(ErrorCode::InvalidArgument, "assignment size does not match point count");
    if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
    if (!(options.rel_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must be >= 0");
    if (static_cast<std::size_t>(init.k()) > n) throw Error(ErrorCode::KTooLarge, "more clusters than points");

    const auto w = detail::resolve_weights(n, weights);
    const int k = init.k();
    std::vector<int> labels = init.labels();

    EuclideanState state = euclidean_state(points, labels, k, w);
    if (detail::repair_empty_clusters(labels, k, state.dist) > 0) state = euclidean_state(points, labels, k, w);

    NystromResult result;
    result.trace.per_iteration_cost.push_back(weighted_cost(state.dist, labels, w));
    for (int it = 1; it <= options.max_iter; ++it) {
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            int best = 0;
            for (int j = 1; j < k; ++j)
                if (state.dist(row, j) < state.dist(row, best)) best = j;
            next[i] = best;
        }
        detail::repair_empty_clusters(next, k, state.dist);

        const bool unchanged = next == labels;
        labels = std::move(next);
        state = euclidean_state(points, labels, k, w);
        const double prev = result.trace.per_iteration_cost.back();
        const double cost = weighted_cost(state.dist, labels, w);
        result.trace.per_iteration_cost.push_back(cost);
        result.trace.iterations = it;
        if (unchanged || prev - cost <= options.rel_tol * prev) {
            result.trace.converged = true;
            break;
        }
    }
    result.assignment = Assignment(std::move(labels), k);
    result.centers = std::move(state.centers);
    result.cost_projected = result.trace.per_iteration_cost.back();
    result.cost_in_h = result.cost_projected;
    return result;
}

NystromResult nystrom_kkmeans(const EmbeddedDataset& embedded, const Assignment& init, const LloydOptions& options,
                              Weights weights) {
    const auto w = detail::resolve_weights(embedded.size(), weights);
    NystromResult r = euclidean_lloyd(embedded.coords, init, options, weights);
    r.cost_in_h = r.cost_projected + mean_residual(embedded, w);
    return r;
}

NystromResult nystrom_kkmeans(const EmbeddedDataset& embedded, int k, Rng& rng, const NystromOptions& options,
                              Weights weights) {
    const std::size_t n = embedded.size();
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "cluster count must be >= 1");
    if (static_cast<std::size_t>(k) > n) throw Error(ErrorCode::KTooLarge, "k exceeds the number of points");
    const auto w = detail::resolve_weights(n, weights);
    const Matrix& z = embedded.coords;

    std::vector<std::size_t> centers;
    if (options.init == NystromInit::KMeansPlusPlus) {
        centers = detail::kmeanspp_indices(
            n, k, w,
            [&](std::size_t i, std::size_t j) {
                return i == j ? 0.0
                              : (z.row(static_cast<Eigen::Index>(i)) - z.row(static_cast<Eigen::Index>(j))).squaredNorm();
            },
            rng);
    } else {
        centers = sample_landmarks_uniform(n, static_cast<std::size_t>(k), rng).indices();
    }
    return nystrom_kkmeans(embedded, nearest_center_partition(z, centers), options.lloyd, weights);
}

Matrix center_landmark_coefficients(const EmbeddedDataset& embedded, const Matrix& centers) {
    if (centers.cols() != embedded.basis.rows())
        throw Error(ErrorCode::CoefficientDimensionMismatch, "center dimension does not match the embedding");
    return centers * embedded.basis.transpose();
}

}  // namespace kkm
