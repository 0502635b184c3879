#include "kkm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "kkm/csv.hpp"

namespace kkm {

namespace {

constexpr double kWeightSumTol = 1e-9;

// Per-cluster quantities behind the kernel expansion
//   |Phi_i - c_j|^2 = K_ii - 2 cross(i, j) + self(j)
// with cross(i, j) = sum_{t in C_j} w_t K_it / W_j and
// self(j) = sum_{t,t' in C_j} w_t w_t' K_tt' / W_j^2.
struct CentroidCache {
    Matrix cross;
    Vector self;
    Vector mass;
};

CentroidCache centroid_cache(const GramMatrix& K, const std::vector<int>& labels, int k,
                             const std::vector<double>& w) {
    const Eigen::Index n = static_cast<Eigen::Index>(K.size());
    CentroidCache c{Matrix::Zero(n, k), Vector::Zero(k), Vector::Zero(k)};
    for (Eigen::Index t = 0; t < n; ++t) {
        const int j = labels[t];
        c.cross.col(j).noalias() += w[t] * K.entries().col(t);
        c.mass(j) += w[t];
    }
    for (int j = 0; j < k; ++j) {
        if (c.mass(j) > 0.0) c.cross.col(j) /= c.mass(j);
    }
    for (Eigen::Index t = 0; t < n; ++t) {
        const int j = labels[t];
        c.self(j) += w[t] * c.cross(t, j);
    }
    for (int j = 0; j < k; ++j) {
        if (c.mass(j) > 0.0) c.self(j) /= c.mass(j);
    }
    return c;
}

Matrix distances_from_cache(const GramMatrix& K, const CentroidCache& c) {
    const Eigen::Index n = c.cross.rows();
    const Eigen::Index k = c.cross.cols();
    Matrix d(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(c.mass(j) > 0.0)) {
            d.col(j).setConstant(std::numeric_limits<double>::infinity());
            continue;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            d(i, j) = std::max(0.0, K.diag()(i) - 2.0 * c.cross(i, j) + c.self(j));
    }
    return d;
}

void check_compatible(const GramMatrix& K, const Assignment& a) {
    if (a.size() != K.size())
        throw Error(ErrorCode::InvalidArgument, "assignment size does not match Gram matrix");
}

double weighted_cost(const Matrix& dist, const std::vector<int>& labels, const std::vector<double>& w) {
    double cost = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) cost += w[i] * dist(static_cast<Eigen::Index>(i), labels[i]);
    return cost;
}

}  // namespace

Assignment::Assignment(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
    if (k_ < 1) throw Error(ErrorCode::InvalidArgument, "cluster count must be >= 1");
    sizes_.assign(static_cast<std::size_t>(k_), 0);
    for (int l : labels_) {
        if (l < 0 || l >= k_) throw Error(ErrorCode::IndexOutOfRange, "cluster label out of range");
        ++sizes_[static_cast<std::size_t>(l)];
    }
}

Assignment Assignment::single_cluster(std::size_t n) { return Assignment(std::vector<int>(n, 0), 1); }

bool Assignment::has_empty_cluster() const {
    return std::find(sizes_.begin(), sizes_.end(), std::size_t{0}) != sizes_.end();
}

void Assignment::write_csv(std::ostream& out) const {
    out << "point_index,cluster_id\n";
    for (std::size_t i = 0; i < labels_.size(); ++i) out << i << ',' << labels_[i] << '\n';
}

std::vector<int> canonical_labels(std::span<const int> labels) {
    std::vector<int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        if (l >= static_cast<int>(remap.size())) remap.resize(static_cast<std::size_t>(l) + 1, -1);
        if (remap[l] < 0) remap[l] = static_cast<int>(std::count_if(remap.begin(), remap.end(), [](int v) { return v >= 0; }));
        out.push_back(remap[l]);
    }
    return out;
}

void ClusterCostTrace::write_csv(std::ostream& out) const {
    out << "iteration,cost\n";
    for (std::size_t t = 0; t < per_iteration_cost.size(); ++t)
        out << t << ',' << format_real(per_iteration_cost[t]) << '\n';
}

namespace detail {

std::vector<double> resolve_weights(std::size_t n, Weights weights) {
    if (weights.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    if (weights.size() != n) throw Error(ErrorCode::InvalidArgument, "weight vector length does not match point count");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "point weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightSumTol) throw Error(ErrorCode::InvalidArgument, "point weights must sum to 1");
    return {weights.begin(), weights.end()};
}

int repair_empty_clusters(std::vector<int>& labels, int k, const Matrix& dist) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    int moves = 0;
    for (int j = 0; j < k; ++j) {
        if (sizes[j] > 0) continue;
        std::size_t best = labels.size();
        double best_d = -1.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (sizes[labels[i]] < 2) continue;
            const double d = dist(static_cast<Eigen::Index>(i), labels[i]);
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best == labels.size()) throw Error(ErrorCode::KTooLarge, "more clusters than points");
        --sizes[labels[best]];
        labels[best] = j;
        sizes[j] = 1;
        ++moves;
    }
    return moves;
}

}  // namespace detail

Matrix point_center_distances(const GramMatrix& K, const Assignment& a, Weights weights) {
    check_compatible(K, a);
    const auto w = detail::resolve_weights(K.size(), weights);
    return distances_from_cache(K, centroid_cache(K, a.labels(), a.k(), w));
}

double cluster_cost(const GramMatrix& K, const Assignment& a, Weights weights) {
    check_compatible(K, a);
    if (a.has_empty_cluster()) throw Error(ErrorCode::EmptyCluster, "cluster_cost: assignment has an empty cluster");
    const auto w = detail::resolve_weights(K.size(), weights);
    const Matrix d = distances_from_cache(K, centroid_cache(K, a.labels(), a.k(), w));
    return weighted_cost(d, a.labels(), w);
}

double point_center_dist_sq(const GramMatrix& K, const Assignment& a, std::size_t i, int j, Weights weights) {
    check_compatible(K, a);
    if (i >= K.size() || j < 0 || j >= a.k()) throw Error(ErrorCode::IndexOutOfRange, "point or cluster index out of range");
    if (a.cluster_sizes()[static_cast<std::size_t>(j)] == 0)
        throw Error(ErrorCode::EmptyCluster, "point_center_dist_sq: cluster is empty");
    const auto w = detail::resolve_weights(K.size(), weights);
    const auto n = static_cast<Eigen::Index>(K.size());
    double mass = 0.0;
    double cross = 0.0;
    double self = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (a.label(t) != j) continue;
        mass += w[t];
        cross += w[t] * K(i, t);
        for (Eigen::Index s = 0; s < n; ++s)
            if (a.label(s) == j) self += w[t] * w[s] * K(t, s);
    }
    return std::max(0.0, K.diag()(i) - 2.0 * cross / mass + self / (mass * mass));
}

LloydResult kernel_lloyd(const GramMatrix& K, const Assignment& init, const LloydOptions& options, Weights weights) {
    check_compatible(K, init);
    if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
    if (!(options.rel_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must be >= 0");
    if (static_cast<std::size_t>(init.k()) > K.size()) throw Error(ErrorCode::KTooLarge, "more clusters than points");

    const auto w = detail::resolve_weights(K.size(), weights);
    const int k = init.k();
    const std::size_t n = K.size();
    std::vector<int> labels = init.labels();

    CentroidCache cache = centroid_cache(K, labels, k, w);
    Matrix dist = distances_from_cache(K, cache);
    if (detail::repair_empty_clusters(labels, k, dist) > 0) {
        cache = centroid_cache(K, labels, k, w);
        dist = distances_from_cache(K, cache);
    }

    LloydResult result;
    result.trace.per_iteration_cost.push_back(weighted_cost(dist, labels, w));

    for (int it = 1; it <= options.max_iter; ++it) {
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            int best = 0;
            for (int j = 1; j < k; ++j)
                if (dist(row, j) < dist(row, best)) best = j;
            next[i] = best;
        }
        detail::repair_empty_clusters(next, k, dist);

        const bool unchanged = next == labels;
        labels = std::move(next);
        cache = centroid_cache(K, labels, k, w);
        dist = distances_from_cache(K, cache);
        const double prev = result.trace.per_iteration_cost.back();
        const double cost = weighted_cost(dist, labels, w);
        result.trace.per_iteration_cost.push_back(cost);
        result.trace.iterations = it;

        if (unchanged || prev - cost <= options.rel_tol * prev) {
            result.trace.converged = true;
            break;
        }
    }
    result.assignment = Assignment(std::move(labels), k);
    return result;
}

ErmResult brute_force_erm(const GramMatrix& K, int k, Weights weights) {
    const std::size_t n = K.size();
    if (n > 12 || k > 4) throw Error(ErrorCode::InstanceTooLarge, "brute_force_erm is limited to n <= 12, k <= 4");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "cluster count must be >= 1");
    if (static_cast<std::size_t>(k) > n) throw Error(ErrorCode::KTooLarge, "more clusters than points");
    const auto w = detail::resolve_weights(n, weights);

    // Weighted pair sums let each partition be scored in O(n^2) without
    // rebuilding centroid caches: cost = sum_j (A_j - S_j / W_j).
    Matrix wk(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) wk(i, j) = w[i] * w[j] * K(i, j);

    std::vector<int> labels(n, 0);
    std::vector<int> best_labels;
    double best_cost = std::numeric_limits<double>::infinity();

    auto score = [&]() {
        double mass[4] = {0, 0, 0, 0};
        double diag[4] = {0, 0, 0, 0};
        double pair[4] = {0, 0, 0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            const int li = labels[i];
            mass[li] += w[i];
            diag[li] += w[i] * K.diag()(i);
            for (std::size_t j = 0; j < n; ++j)
                if (labels[j] == li) pair[li] += wk(i, j);
        }
        double cost = 0.0;
        for (int j = 0; j < k; ++j) cost += std::max(0.0, diag[j] - pair[j] / mass[j]);
        return cost;
    };

    // Restricted growth strings with exactly k blocks. Using exactly k loses
    // nothing: splitting a block never increases the cost.
    auto recurse = [&](auto&& self, std::size_t i, int used) -> void {
        if (i == n) {
            if (used != k) return;
            const double c = score();
            if (c < best_cost) {
                best_cost = c;
                best_labels = labels;
            }
            return;
        }
        if (static_cast<int>(n - i) < k - used) return;
        const int top = std::min(used, k - 1);
        for (int l = 0; l <= top; ++l) {
            labels[i] = l;
            self(self, i + 1, l == used ? used + 1 : used);
        }
    };
    recurse(recurse, 0, 0);

    Assignment best(std::move(best_labels), k);
    const double cost = cluster_cost(K, best, weights);
    return {std::move(best), cost};
}

}  // namespace kkm
