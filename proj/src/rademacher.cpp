#include "kkm/rademacher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "kkm/stats.hpp"

namespace kkm {

namespace {

constexpr double kNormTol = 1e-9;

void check_norms(const FeatureVectors& data) {
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        if (data.row(i).norm() > 1.0 + kNormTol)
            throw Error(ErrorCode::NormViolation, "feature vector " + std::to_string(i) + " has norm > 1");
}

// Signs for Monte Carlo draw `draw`, derived from (master, draw) alone so a
// draw's pattern does not depend on evaluation order.
void draw_signs(std::uint64_t master, std::uint64_t draw, std::vector<int>& sigma) {
    std::uint64_t state = derive_seed(master, draw);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (i % 64 == 0) bits = splitmix64(state++);
        sigma[i] = (bits >> (i % 64)) & 1U ? 1 : -1;
    }
}

void mask_signs(std::uint64_t mask, std::vector<int>& sigma) {
    for (std::size_t i = 0; i < sigma.size(); ++i) sigma[i] = (mask >> i) & 1U ? 1 : -1;
}

template <class PerDraw>
RadEstimate average_over_signs(std::size_t n, bool exact, std::size_t trials, Rng& rng, PerDraw&& per_draw) {
    std::vector<int> sigma(n);
    RadEstimate est;
    est.exact = exact;
    if (exact) {
        const std::uint64_t patterns = std::uint64_t{1} << n;
        double total = 0.0;
        if (n == 0) total = per_draw(sigma);
        // Antipodal patterns are summed together, so a draw that is odd in
        // sigma cancels exactly.
        for (std::uint64_t mask = 0; mask < patterns / 2; ++mask) {
            mask_signs(mask, sigma);
            double pair = per_draw(sigma);
            mask_signs(mask ^ (patterns - 1), sigma);
            pair += per_draw(sigma);
            total += pair;
        }
        est.value = total / static_cast<double>(patterns);
        est.trials = static_cast<std::size_t>(patterns);
        return est;
    }
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "Monte Carlo needs at least one trial");
    const std::uint64_t master = rng.next_u64();
    RunningMoments moments;
    for (std::size_t t = 0; t < trials; ++t) {
        draw_signs(master, t, sigma);
        moments.add(per_draw(sigma));
    }
    est.value = moments.mean();
    est.std_error = moments.std_error();
    est.trials = trials;
    return est;
}

}  // namespace

double coordinate_sup(const FeatureVectors& data, std::span<const int> sigma) {
    if (sigma.size() != static_cast<std::size_t>(data.rows()))
        throw Error(ErrorCode::InvalidArgument, "sign vector length does not match data");
    double s = 0.0;
    double base = 0.0;
    Vector v = Vector::Zero(data.cols());
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
        s += sigma[j];
        base += sigma[j] * data.row(j).squaredNorm();
        v += sigma[j] * data.row(j).transpose();
    }
    // max over |c| <= 1 of s |c|^2 - 2 <v, c>: take c = -r v/|v|, leaving
    // s r^2 + 2 r |v| on r in [0, 1].
    const double nv = v.norm();
    double inner;
    if (s >= 0.0) {
        inner = s + 2.0 * nv;
    } else if (nv <= -s) {
        inner = nv * nv / -s;  // interior vertex; 0 when v = 0
    } else {
        inner = s + 2.0 * nv;
    }
    return base + inner;
}

RadEstimate coordinate_rad(const FeatureVectors& data, std::size_t trials, Rng& rng, RadMode mode) {
    check_norms(data);
    const auto n = static_cast<std::size_t>(data.rows());
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty data");
    bool exact = mode == RadMode::Exact || (mode == RadMode::Automatic && n <= kMaxExactSigns);
    if (exact && n > kMaxExactSigns) throw Error(ErrorCode::EnumerationTooLarge, "too many points to enumerate signs");
    return average_over_signs(n, exact, trials, rng,
                              [&](const std::vector<int>& sigma) { return coordinate_sup(data, sigma); });
}

double coordinate_rad_bound(std::size_t n) { return 3.0 * std::sqrt(static_cast<double>(n)); }

LowerBoundInstance lower_bound_construction(int k, int n) {
    if (k < 1 || n < 1 || n % k != 0)
        throw Error(ErrorCode::NotDivisible, "n = " + std::to_string(n) + " is not a positive multiple of k = " +
                                                 std::to_string(k));
    if (k > 16) throw Error(ErrorCode::EnumerationTooLarge, "construction class 2^k is limited to k <= 16");
    LowerBoundInstance inst;
    inst.k = k;
    inst.n = n;
    inst.data = FeatureVectors::Zero(n, k);
    const int block = n / k;
    for (int t = 0; t < n; ++t) inst.data(t, t / block) = 1.0;

    const std::uint32_t members = 1U << k;
    inst.center_sets.reserve(members);
    for (std::uint32_t mask = 0; mask < members; ++mask) {
        FeatureVectors centers = FeatureVectors::Zero(k, k);
        for (int i = 0; i < k; ++i) centers(i, i) = (mask >> i) & 1U ? 1.0 : -1.0;
        inst.center_sets.push_back(std::move(centers));
    }
    return inst;
}

double lower_bound_value(int k, int n) { return std::sqrt(static_cast<double>(k) * n / 2.0); }

RadEstimate finite_class_rad(const FeatureVectors& data, const std::vector<FeatureVectors>& center_sets,
                             std::size_t trials, Rng& rng, bool exact) {
    if (center_sets.empty()) throw Error(ErrorCode::InvalidArgument, "hypothesis class is empty");
    const auto n = static_cast<std::size_t>(data.rows());
    if (exact && (n > kMaxExactSigns || center_sets.size() > (std::size_t{1} << 16)))
        throw Error(ErrorCode::EnumerationTooLarge, "exact enumeration needs n <= 20 and at most 2^16 members");

    // loss(c, i) = min_j |Phi_i - c_j|^2 for every member c of the class.
    const auto members = static_cast<Eigen::Index>(center_sets.size());
    Matrix loss(members, static_cast<Eigen::Index>(n));
    for (Eigen::Index c = 0; c < members; ++c) {
        const FeatureVectors& centers = center_sets[c];
        if (centers.cols() != data.cols())
            throw Error(ErrorCode::InvalidArgument, "center dimension does not match data");
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < centers.rows(); ++j)
                best = std::min(best, (data.row(i) - centers.row(j)).squaredNorm());
            loss(c, i) = best;
        }
    }

    Vector s(static_cast<Eigen::Index>(n));
    return average_over_signs(n, exact, trials, rng, [&](const std::vector<int>& sigma) {
        for (std::size_t i = 0; i < n; ++i) s(static_cast<Eigen::Index>(i)) = sigma[i];
        return (loss * s).maxCoeff();
    });
}

KhintchineResult khintchine_check(int block, std::size_t trials, Rng& rng) {
    if (block < 1) throw Error(ErrorCode::InvalidArgument, "block must be >= 1");
    KhintchineResult r;
    r.rhs = std::sqrt(block / 8.0);
    if (block <= kMaxExactSigns) {
        const std::uint64_t patterns = std::uint64_t{1} << block;
        std::uint64_t total = 0;
        for (std::uint64_t mask = 0; mask < patterns; ++mask) {
            const int plus = std::popcount(mask);
            total += static_cast<std::uint64_t>(std::abs(2 * plus - block));
        }
        r.lhs = 0.5 * static_cast<double>(total) / static_cast<double>(patterns);
        r.exact = true;
        return r;
    }
    std::vector<int> sigma(static_cast<std::size_t>(block));
    const std::uint64_t master = rng.next_u64();
    RunningMoments m;
    for (std::size_t t = 0; t < trials; ++t) {
        draw_signs(master, t, sigma);
        int sum = 0;
        for (int v : sigma) sum += v;
        m.add(std::abs(sum));
    }
    r.lhs = 0.5 * m.mean();
    return r;
}

double theorem_bound_value(int k, double n, double max_coord_rad, double delta_exponent, double c_const) {
    if (!(max_coord_rad > 0.0) || !(n > max_coord_rad))
        throw Error(ErrorCode::InvalidLogArgument, "theorem bound needs 0 < max_coord_rad < n");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    return c_const * std::sqrt(static_cast<double>(k)) * max_coord_rad *
           std::pow(std::log(n / max_coord_rad), 1.5 + delta_exponent);
}

LipschitzCheck min_lipschitz(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::InvalidArgument, "vectors must be nonempty and equal length");
    LipschitzCheck r;
    r.gap = std::abs(*std::min_element(a.begin(), a.end()) - *std::min_element(b.begin(), b.end()));
    for (std::size_t i = 0; i < a.size(); ++i) r.sup_norm = std::max(r.sup_norm, std::abs(a[i] - b[i]));
    return r;
}

}  // namespace kkm
