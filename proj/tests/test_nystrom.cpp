#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "kkm/nystrom.hpp"
#include "test_util.hpp"

using namespace kkm;

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// min over all labelings of the restricted cost: centroid cost on Z plus the
// mean residual.
double restricted_optimum(const EmbeddedDataset& e, int k) {
    const std::size_t n = e.size();
    std::vector<int> labels(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<int> seen(static_cast<std::size_t>(k), 0);
        for (int l : labels) seen[static_cast<std::size_t>(l)] = 1;
        if (std::find(seen.begin(), seen.end(), 0) == seen.end())
            best = std::min(best, test::embedding_cost(e.coords, labels, k));
        std::size_t pos = 0;
        while (pos < n && ++labels[pos] == k) labels[pos++] = 0;
        if (pos == n) break;
    }
    return best + e.residuals.mean();
}

}  // namespace

TEST(Landmarks, UniformSampling) {
    Rng rng(1);
    EXPECT_EQ(sample_landmarks_uniform(7, 7, rng).indices(), all_indices(7));
    const LandmarkSet one = sample_landmarks_uniform(7, 1, rng);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_LT(one.indices()[0], 7u);
    Rng a(99), b(99);
    EXPECT_EQ(sample_landmarks_uniform(50, 10, a).indices(), sample_landmarks_uniform(50, 10, b).indices());
    EXPECT_THROW(sample_landmarks_uniform(5, 6, rng), Error);
    EXPECT_THROW(sample_landmarks_uniform(5, 0, rng), Error);
}

TEST(Landmarks, SamplingIsUniform) {
    Rng rng(2);
    std::vector<int> hits(10, 0);
    for (int t = 0; t < 20000; ++t) {
        const LandmarkSet L = sample_landmarks_uniform(10, 3, rng);
        for (std::size_t i : L.indices()) ++hits[i];
    }
    for (int h : hits) EXPECT_NEAR(h / 20000.0, 0.3, 0.02);
}

TEST(Landmarks, RejectsBadSets) {
    EXPECT_THROW(LandmarkSet({1, 1}, 4), Error);
    EXPECT_THROW(LandmarkSet({4}, 4), Error);
}

TEST(LandmarkSize, Examples) {
    const double inv_e = std::exp(-1.0);
    EXPECT_EQ(landmark_size(100, 4, inv_e, 4.0, LandmarkMode::General), 20u);
    EXPECT_EQ(landmark_size(10000, 16, 0.1, 16.0, LandmarkMode::General), 922u);
    EXPECT_EQ(landmark_size(100, 4, inv_e, std::nullopt, LandmarkMode::Eigendecay), 10u);
    EXPECT_EQ(landmark_size(100, 4, inv_e, 4.0, LandmarkMode::LinearK), 10u);
    EXPECT_EQ(landmark_size(100, 4, inv_e, 2.0, LandmarkMode::General), 10u);
    EXPECT_EQ(landmark_size(4, 2, 1e-9, 2.0, LandmarkMode::General), 4u);
    EXPECT_THROW(landmark_size(100, 4, 0.0, 4.0, LandmarkMode::General), Error);
    EXPECT_THROW(landmark_size(100, 4, 1.0, 4.0, LandmarkMode::General), Error);
    EXPECT_THROW(landmark_size(100, 4, 0.1, std::nullopt, LandmarkMode::General), Error);
}

TEST(Embed, AllPointsLinearFullRank) {
    Rng rng(3);
    const GramMatrix K = gram_matrix(KernelSpec::linear(), test::random_points(5, 5, rng));
    const EmbeddedDataset e = nystrom_embed(K, LandmarkSet(all_indices(5), 5));
    EXPECT_LE((e.coords * e.coords.transpose() - K.entries()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(e.residuals.maxCoeff(), 1e-8);
    EXPECT_FALSE(e.rank_deficient);
}

TEST(Embed, SingleLandmarkClosedForm) {
    Rng rng(4);
    const GramMatrix K = test::random_gaussian_gram(8, rng);
    const std::size_t t = 3;
    const EmbeddedDataset e = nystrom_embed(K, LandmarkSet({t}, 8));
    ASSERT_EQ(e.coords.cols(), 1);
    const double sign = e.coords(3, 0) > 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < 8; ++i)
        EXPECT_NEAR(sign * e.coords(static_cast<Eigen::Index>(i), 0), K(i, t) / std::sqrt(K(t, t)), 1e-12);
}

TEST(Embed, ProjectionProperties) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.index(30);
        const GramMatrix K = test::random_gaussian_gram(n, rng, 3, 0.8);
        const LandmarkSet L = sample_landmarks_uniform(n, 1 + rng.index(n), rng);
        const EmbeddedDataset e = nystrom_embed(K, L);
        EXPECT_GE(e.residuals.minCoeff(), -1e-10);
        for (std::size_t a : L.indices())
            for (std::size_t b : L.indices())
                EXPECT_NEAR(e.coords.row(static_cast<Eigen::Index>(a)).dot(e.coords.row(static_cast<Eigen::Index>(b))),
                            K(a, b), 1e-6);
        // Z Z^T + diag(residual) reproduces the diagonal of K.
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_NEAR(e.coords.row(static_cast<Eigen::Index>(i)).squaredNorm() + e.residuals(static_cast<Eigen::Index>(i)),
                        K(i, i), 1e-8);
    }
}

TEST(Embed, DuplicateLandmarksAreRankDeficient) {
    PointSet x(4, 1);
    x << 0.0, 0.0, 1.0, 2.0;
    const GramMatrix K = gram_matrix(KernelSpec::gaussian(1.0), x);
    const EmbeddedDataset e = nystrom_embed(K, LandmarkSet({0, 1, 2}, 4));
    EXPECT_TRUE(e.rank_deficient);
    EXPECT_EQ(e.rank, 2);
    // Structure holds O(n m) data only.
    EXPECT_EQ(e.coords.rows(), 4);
    EXPECT_LE(e.coords.cols(), 3);
    EXPECT_EQ(e.residuals.size(), 4);
}

TEST(NystromKMeans, AllLandmarksMatchesKernelLloyd) {
    Rng rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 6 + rng.index(30);
        const int k = 1 + static_cast<int>(rng.index(4));
        const GramMatrix K = test::random_gaussian_gram(n, rng, 2, 0.6);
        const Assignment init(test::random_labels(n, k, rng), k);
        const EmbeddedDataset e = nystrom_embed(K, LandmarkSet(all_indices(n), n));
        const NystromResult ny = nystrom_kkmeans(e, init);
        const LloydResult ex = kernel_lloyd(K, init);
        EXPECT_NEAR(ny.cost_in_h, ex.trace.per_iteration_cost.back(), 1e-8);
    }
}

TEST(NystromKMeans, KEqualsNIsZero) {
    Rng rng(7);
    const GramMatrix K = test::random_gaussian_gram(6, rng);
    const EmbeddedDataset e = nystrom_embed(K, LandmarkSet(all_indices(6), 6));
    EXPECT_NEAR(nystrom_kkmeans(e, 6, rng).cost_in_h, 0.0, 1e-9);
}

TEST(NystromKMeans, RecoversBlobsWithFourLandmarks) {
    int hits = 0;
    for (int run = 0; run < 100; ++run) {
        Rng rng(derive_seed(8, static_cast<std::uint64_t>(run)));
        auto [x, truth] = test::two_blobs(40, rng);
        const GramMatrix K = gram_matrix(KernelSpec::gaussian(1.0), x);
        const EmbeddedDataset e = nystrom_embed(K, sample_landmarks_uniform(40, 4, rng));
        hits += test::same_partition(nystrom_kkmeans(e, 2, rng).assignment.labels(), truth);
    }
    EXPECT_GE(hits, 95);
}

TEST(NystromKMeans, TraceNonincreasing) {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 10 + rng.index(80);
        const GramMatrix K = test::random_gaussian_gram(n, rng, 2, 0.5);
        const EmbeddedDataset e = nystrom_embed(K, sample_landmarks_uniform(n, 1 + rng.index(n), rng));
        NystromOptions opts;
        opts.init = trial % 2 ? NystromInit::Random : NystromInit::KMeansPlusPlus;
        const auto& c = nystrom_kkmeans(e, 1 + static_cast<int>(rng.index(6)), rng, opts).trace.per_iteration_cost;
        for (std::size_t t = 1; t < c.size(); ++t) EXPECT_LE(c[t], c[t - 1] * (1.0 + 1e-9));
    }
}

TEST(NystromKMeans, NeverBelowBruteForce) {
    Rng rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 4 + rng.index(5);
        const int k = 1 + static_cast<int>(rng.index(3));
        const GramMatrix K = test::random_gaussian_gram(n, rng);
        const EmbeddedDataset e = nystrom_embed(K, sample_landmarks_uniform(n, 1 + rng.index(n), rng));
        EXPECT_GE(nystrom_kkmeans(e, k, rng).cost_in_h, brute_force_erm(K, k).cost - 1e-10);
    }
}

TEST(NystromKMeans, RestrictedOptimumShrinksOnNestedLandmarks) {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 6;
        const GramMatrix K = test::random_gaussian_gram(n, rng, 2, 0.7);
        std::vector<std::size_t> order = all_indices(n);
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t m = 1; m <= n; ++m) {
            std::vector<std::size_t> idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
            std::sort(idx.begin(), idx.end());
            const double opt = restricted_optimum(nystrom_embed(K, LandmarkSet(idx, n)), 2);
            EXPECT_LE(opt, prev + 1e-10);
            prev = opt;
        }
    }
}

TEST(NystromKMeans, LandmarkCoefficientsReproduceDistances) {
    Rng rng(12);
    const std::size_t n = 25;
    const GramMatrix K = test::random_gaussian_gram(n, rng);
    const LandmarkSet L = sample_landmarks_uniform(n, 6, rng);
    const EmbeddedDataset e = nystrom_embed(K, L);
    const NystromResult r = nystrom_kkmeans(e, 3, rng);
    const Matrix coef = center_landmark_coefficients(e, r.centers);
    ASSERT_EQ(coef.cols(), 6);
    const GramMatrix Kmm = K.submatrix(L.indices());
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < 3; ++j) {
            double cross = 0.0;
            for (std::size_t b = 0; b < 6; ++b) cross += coef(j, static_cast<Eigen::Index>(b)) * K(i, L.indices()[b]);
            const double self = coef.row(j).dot(Kmm.entries() * coef.row(j).transpose());
            const double direct = K(i, i) - 2.0 * cross + self;
            const double via_z = (e.coords.row(static_cast<Eigen::Index>(i)) - r.centers.row(j)).squaredNorm() +
                                 e.residuals(static_cast<Eigen::Index>(i));
            EXPECT_NEAR(direct, via_z, 1e-8);
        }
    EXPECT_THROW(center_landmark_coefficients(e, Matrix::Zero(3, 2)), Error);
}

TEST(Embed, CsvHeader) {
    Rng rng(13);
    const GramMatrix K = test::random_gaussian_gram(3, rng);
    std::ostringstream out;
    nystrom_embed(K, LandmarkSet({0, 2}, 3)).write_csv(out);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "z0,z1,residual");
}
