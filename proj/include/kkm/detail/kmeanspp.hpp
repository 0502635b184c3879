#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "kkm/rng.hpp"

namespace kkm::detail {

// D^2 seeding over an abstract squared distance dist(i, j). Shared by the
// kernel and the Nystrom-coordinate paths so that both consume the random
// stream identically. When every remaining point sits on a chosen center the
// next center is drawn uniformly among points not yet chosen.
template <class Dist>
std::vector<std::size_t> kmeanspp_indices(std::size_t n, int k, const std::vector<double>& w, Dist&& dist, Rng& rng) {
    std::vector<std::size_t> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(rng.categorical(w));

    std::vector<double> mind(n, std::numeric_limits<double>::infinity());
    std::vector<double> weight(n);
    for (int c = 1; c < k; ++c) {
        const std::size_t last = centers.back();
        for (std::size_t i = 0; i < n; ++i) {
            mind[i] = std::min(mind[i], dist(i, last));
            weight[i] = w[i] * mind[i];
        }
        std::size_t next = rng.categorical(weight);
        if (next == n) {
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i)
                if (std::find(centers.begin(), centers.end(), i) == centers.end()) rest.push_back(i);
            next = rest[rng.index(rest.size())];
        }
        centers.push_back(next);
    }
    return centers;
}

}  // namespace kkm::detail
