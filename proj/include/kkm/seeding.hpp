#pragma once

#include <cstddef>
#include <vector>

#include "kkm/clustering.hpp"
#include "kkm/rng.hpp"

namespace kkm {

/// Discrete centers (data points) together with the partition they induce.
/// `cost` is the mean-centroid cost W(C, P_n) of that partition, so it is
/// directly comparable with every other cost in the library.
struct SeedingResult {
    std::vector<std::size_t> center_indices;
    Assignment induced;
    double cost = 0.0;
    int swaps_accepted = 0;
    /// Cost before any swap followed by the cost after each accepted swap.
    std::vector<double> cost_history;
};

/// Sampling weights for the next D^2 draw: w_i * min_c |Phi_i - Phi_c|^2.
std::vector<double> d2_weights(const GramMatrix& K, std::span<const std::size_t> centers, Weights weights = {});

/// Nearest-center partition for the given center points (ties to the lowest
/// center index; each center point keeps its own cluster) and its cost.
SeedingResult induced_by_centers(const GramMatrix& K, std::vector<std::size_t> centers, Weights weights = {});

/// Kernel k-means++: first center drawn by weight, each further center by
/// D^2 sampling. Throws KTooLarge when k > n.
SeedingResult kernel_kmeanspp(const GramMatrix& K, int k, Rng& rng, Weights weights = {});

/// Local search: each round D^2-samples a candidate point and tries it in
/// place of every current center, keeping the best swap if it lowers the cost
/// by more than 1e-12.
SeedingResult local_search_improve(const GramMatrix& K, const SeedingResult& seed, int rounds, Rng& rng,
                                   Weights weights = {});

inline int default_search_rounds(int k) { return 25 * k; }

struct ApproximateErmResult {
    Assignment assignment;
    double cost = 0.0;
    double seeding_cost = 0.0;
    double search_cost = 0.0;
    int swaps_accepted = 0;
};

/// k-means++ seeding, then local search, then (optionally) Lloyd refinement.
ApproximateErmResult approximate_erm(const GramMatrix& K, int k, int rounds, bool lloyd_refine, Rng& rng,
                                     Weights weights = {}, const LloydOptions& lloyd = {});

}  // namespace kkm
