#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kkm/kernel.hpp"
#include "kkm/rng.hpp"

namespace kkm {

// The lab works with explicit feature vectors: each row of a FeatureVectors
// matrix is one Phi_i, and every norm must be at most 1.
using FeatureVectors = Eigen::MatrixXd;

struct RadEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 when exact
    std::size_t trials = 1;  // sign patterns averaged over
    bool exact = false;
};

enum class RadMode { Automatic, Exact, MonteCarlo };

/// Largest n for which sign patterns are enumerated exhaustively.
inline constexpr int kMaxExactSigns = 20;

/// sup over |c| <= 1 of sum_j sigma_j |Phi_j - c|^2, in closed form.
double coordinate_sup(const FeatureVectors& data, std::span<const int> sigma);

/// Rademacher complexity of the single-center class {x -> |Phi_x - c|^2 : |c| <= 1}.
/// Automatic mode enumerates all sign patterns when n <= 20 and otherwise
/// averages `trials` Monte Carlo draws. Throws NormViolation.
RadEstimate coordinate_rad(const FeatureVectors& data, std::size_t trials, Rng& rng,
                           RadMode mode = RadMode::Automatic);

/// Worst-case coordinate-class complexity bound, 3 sqrt(n).
double coordinate_rad_bound(std::size_t n);

/// n/k copies of each of e_1..e_k, and the 2^k center collections
/// (s_1 e_1, ..., s_k e_k), s in {-1, +1}^k.
struct LowerBoundInstance {
    int k = 0;
    int n = 0;
    FeatureVectors data;
    std::vector<FeatureVectors> center_sets;  // each k x k, one center per row

    std::size_t class_size() const { return center_sets.size(); }
};

/// Throws NotDivisible unless k >= 1 and k divides n.
LowerBoundInstance lower_bound_construction(int k, int n);

/// sqrt(k n / 2), the value the construction is guaranteed to reach.
double lower_bound_value(int k, int n);

/// E_sigma max over the class of sum_i sigma_i min_j |Phi_i - c_j|^2.
/// Exact enumeration needs n <= 20 and at most 2^16 members
/// (EnumerationTooLarge otherwise).
RadEstimate finite_class_rad(const FeatureVectors& data, const std::vector<FeatureVectors>& center_sets,
                             std::size_t trials, Rng& rng, bool exact);

struct KhintchineResult {
    double lhs = 0.0;  // (1/2) E|sum_{t<=block} sigma_t|
    double rhs = 0.0;  // sqrt(block / 8)
    bool exact = false;

    bool holds() const { return lhs >= rhs; }
};

/// Exhaustive for block <= 20, otherwise `trials` Monte Carlo draws.
KhintchineResult khintchine_check(int block, std::size_t trials, Rng& rng);

/// c * sqrt(k) * R * log(n / R)^(3/2 + delta_exponent), with R the maximal
/// coordinate-class complexity. Throws InvalidLogArgument unless 0 < R < n.
double theorem_bound_value(int k, double n, double max_coord_rad, double delta_exponent, double c_const);

struct LipschitzCheck {
    double gap = 0.0;       // |min(a) - min(b)|
    double sup_norm = 0.0;  // max_i |a_i - b_i|

    bool holds() const { return gap <= sup_norm; }
};

/// Both sides of the 1-Lipschitz property of min under the sup norm.
LipschitzCheck min_lipschitz(std::span<const double> a, std::span<const double> b);

}  // namespace kkm
