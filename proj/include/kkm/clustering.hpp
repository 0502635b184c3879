#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "kkm/kernel.hpp"

namespace kkm {

/// Optional per-point probability weights. An empty span means the empirical
/// measure P_n (every point weighs 1/n); otherwise entries must be positive
/// and sum to 1. All costs are weighted means, never raw sums.
using Weights = std::span<const double>;

/// Partition of n points into k clusters. Centers are implicit: the (weighted)
/// mean of each cluster in feature space. Construction validates label range
/// only; operations that need nonempty clusters check for themselves.
class Assignment {
public:
    Assignment() = default;
    Assignment(std::vector<int> labels, int k);

    static Assignment single_cluster(std::size_t n);

    const std::vector<int>& labels() const { return labels_; }
    int label(std::size_t i) const { return labels_[i]; }
    int k() const { return k_; }
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::size_t>& cluster_sizes() const { return sizes_; }
    bool has_empty_cluster() const;

    /// Columns point_index,cluster_id with a header row.
    void write_csv(std::ostream& out) const;

    friend bool operator==(const Assignment& a, const Assignment& b) {
        return a.k_ == b.k_ && a.labels_ == b.labels_;
    }

private:
    std::vector<int> labels_;
    int k_ = 0;
    std::vector<std::size_t> sizes_;
};

/// Relabels clusters in order of first appearance so that partitions equal up
/// to label permutation compare equal.
std::vector<int> canonical_labels(std::span<const int> labels);

struct ClusterCostTrace {
    /// Entry 0 is the cost of the starting assignment, entry t the cost after
    /// iteration t.
    std::vector<double> per_iteration_cost;
    bool converged = false;
    int iterations = 0;

    void write_csv(std::ostream& out) const;
};

/// W(C, P_n) for the mean centroids of `a`: weighted mean squared distance of
/// each point to the mean of its cluster, from the three-term kernel expansion.
/// Throws EmptyCluster.
double cluster_cost(const GramMatrix& K, const Assignment& a, Weights weights = {});

/// |Phi_i - mean(C_j)|^2, clamped at 0. Throws EmptyCluster, IndexOutOfRange.
double point_center_dist_sq(const GramMatrix& K, const Assignment& a, std::size_t i, int j,
                            Weights weights = {});

/// n x k matrix of point_center_dist_sq; empty clusters get +infinity.
Matrix point_center_distances(const GramMatrix& K, const Assignment& a, Weights weights = {});

struct LloydOptions {
    int max_iter = 300;
    double rel_tol = 1e-9;
};

struct LloydResult {
    Assignment assignment;
    ClusterCostTrace trace;
};

/// Lloyd iterations in feature space. Ties go to the lowest cluster index; a
/// cluster that empties receives the point farthest from its current center
/// (taken from clusters holding at least two points).
LloydResult kernel_lloyd(const GramMatrix& K, const Assignment& init, const LloydOptions& options = {},
                         Weights weights = {});

struct ErmResult {
    Assignment assignment;
    double cost = 0.0;
};

/// Exact empirical risk minimizer by enumerating every partition into k
/// nonempty blocks. Optimal centers are cluster means, so this is the minimum
/// over all of H^k. Limited to n <= 12, k <= 4 (InstanceTooLarge).
ErmResult brute_force_erm(const GramMatrix& K, int k, Weights weights = {});

namespace detail {

/// Returns the weights to use (uniform when `weights` is empty) after
/// validating length, positivity and normalization.
std::vector<double> resolve_weights(std::size_t n, Weights weights);

/// Moves points into empty clusters in place; `dist` holds each point's
/// distance to every current center. Returns the number of moves.
int repair_empty_clusters(std::vector<int>& labels, int k, const Matrix& dist);

}  // namespace detail

}  // namespace kkm
