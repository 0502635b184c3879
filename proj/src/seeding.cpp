#include "kkm/seeding.hpp"

#include <algorithm>
#include <limits>

#include "kkm/detail/kmeanspp.hpp"

namespace kkm {

namespace {

constexpr double kSwapGain = 1e-12;

}  // namespace

std::vector<double> d2_weights(const GramMatrix& K, std::span<const std::size_t> centers, Weights weights) {
    const auto w = detail::resolve_weights(K.size(), weights);
    std::vector<double> out(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c : centers) best = std::min(best, kernel_dist_sq(K, i, c));
        out[i] = w[i] * best;
    }
    return out;
}

SeedingResult induced_by_centers(const GramMatrix& K, std::vector<std::size_t> centers, Weights weights) {
    const std::size_t n = K.size();
    const int k = static_cast<int>(centers.size());
    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const double d = kernel_dist_sq(K, i, centers[j]);
            if (d < best) {
                best = d;
                labels[i] = j;
            }
        }
    }
    for (int j = 0; j < k; ++j) labels[centers[j]] = j;

    SeedingResult r;
    r.center_indices = std::move(centers);
    r.induced = Assignment(std::move(labels), k);
    r.cost = cluster_cost(K, r.induced, weights);
    r.cost_history.push_back(r.cost);
    return r;
}

SeedingResult kernel_kmeanspp(const GramMatrix& K, int k, Rng& rng, Weights weights) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "cluster count must be >= 1");
    if (static_cast<std::size_t>(k) > K.size()) throw Error(ErrorCode::KTooLarge, "k exceeds the number of points");
    const auto w = detail::resolve_weights(K.size(), weights);
    auto centers = detail::kmeanspp_indices(
        K.size(), k, w, [&](std::size_t i, std::size_t j) { return kernel_dist_sq(K, i, j); }, rng);
    return induced_by_centers(K, std::move(centers), weights);
}

SeedingResult local_search_improve(const GramMatrix& K, const SeedingResult& seed, int rounds, Rng& rng,
                                   Weights weights) {
    if (rounds < 0) throw Error(ErrorCode::InvalidArgument, "rounds must be >= 0");
    SeedingResult current = seed;
    if (current.cost_history.empty()) current.cost_history.push_back(current.cost);
    const int k = static_cast<int>(current.center_indices.size());

    for (int round = 0; round < rounds; ++round) {
        const auto weight = d2_weights(K, current.center_indices, weights);
        const std::size_t candidate = rng.categorical(weight);
        if (candidate == weight.size()) break;  // every point sits on a center

        int best_slot = -1;
        SeedingResult best;
        for (int slot = 0; slot < k; ++slot) {
            auto centers = current.center_indices;
            centers[slot] = candidate;
            SeedingResult trial = induced_by_centers(K, std::move(centers), weights);
            const double bar = best_slot < 0 ? current.cost - kSwapGain : best.cost;
            if (trial.cost < bar) {
                best_slot = slot;
                best = std::move(trial);
            }
        }
        if (best_slot < 0) continue;

        current.center_indices = std::move(best.center_indices);
        current.induced = std::move(best.induced);
        current.cost = best.cost;
        ++current.swaps_accepted;
        current.cost_history.push_back(current.cost);
    }
    return current;
}

ApproximateErmResult approximate_erm(const GramMatrix& K, int k, int rounds, bool lloyd_refine, Rng& rng,
                                     Weights weights, const LloydOptions& lloyd) {
    ApproximateErmResult out;
    const SeedingResult seed = kernel_kmeanspp(K, k, rng, weights);
    out.seeding_cost = seed.cost;
    const SeedingResult searched = local_search_improve(K, seed, rounds, rng, weights);
    out.search_cost = searched.cost;
    out.swaps_accepted = searched.swaps_accepted;
    if (lloyd_refine) {
        LloydResult refined = kernel_lloyd(K, searched.induced, lloyd, weights);
        out.cost = refined.trace.per_iteration_cost.back();
        out.assignment = std::move(refined.assignment);
    } else {
        out.cost = searched.cost;
        out.assignment = searched.induced;
    }
    return out;
}

}  // namespace kkm
