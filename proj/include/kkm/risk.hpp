#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kkm/clustering.hpp"
#include "kkm/nystrom.hpp"
#include "kkm/rng.hpp"

namespace kkm {

/// Finite-support distribution: atoms (rows) with probability weights. The
/// atom Gram matrix is built once, so population risks are exact sums.
class DistributionSpec {
public:
    /// Throws InvalidArgument for empty atoms, negative weights or weights not
    /// summing to 1 within 1e-12; NormalizationViolated if an atom has
    /// kappa(x, x) > 1.
    DistributionSpec(PointSet atoms, std::vector<double> weights, KernelSpec kernel, std::uint64_t generator_seed = 0);

    const PointSet& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    const KernelSpec& kernel() const { return kernel_; }
    std::uint64_t generator_seed() const { return seed_; }
    const GramMatrix& gram() const { return gram_; }
    std::size_t size() const { return weights_.size(); }

    /// n i.i.d. atom indices drawn by weight.
    std::vector<std::size_t> sample(std::size_t n, Rng& rng) const;

private:
    PointSet atoms_;
    std::vector<double> weights_;
    KernelSpec kernel_;
    std::uint64_t seed_;
    GramMatrix gram_;
};

struct BenchmarkParams {
    int clouds = 2;           // number of Gaussian clouds (2 k')
    int atoms_per_cloud = 6;
    int dim = 3;
    double spread = 0.35;     // std-dev of the in-cloud perturbation before projection
    double bandwidth = 1.0;
    std::uint64_t seed = 20240611;
};

/// Gaussian clouds of atoms on the unit sphere with uniform weights and a
/// Gaussian kernel.
DistributionSpec standard_benchmark(const BenchmarkParams& params = {});

/// sum_a w_a min_j |Phi(atom_a) - c_j|^2 for centers c_j = sum_b coeffs(j, b) Phi(atom_b).
/// Throws CoefficientDimensionMismatch unless coeffs has one column per atom.
double population_risk(const DistributionSpec& p, const Matrix& coeffs);

struct OptimalRisk {
    double value = 0.0;
    bool surrogate = false;  // true when enumeration was out of reach
};

/// W*(P). Exact by weighted partition enumeration when N <= 12 and k <= 4,
/// otherwise the best of 200 seeded approximate_erm runs on the atoms.
OptimalRisk optimal_risk(const DistributionSpec& p, int k, std::uint64_t seed = 0);

enum class Method { ExactErmApprox, Nystrom, ApproxErm };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct LandmarkPolicy {
    enum class Kind { Fixed, General, Eigendecay };
    Kind kind = Kind::General;
    std::size_t fixed_m = 0;
    double c_scale = 1.0;
    double delta = 0.1;

    static LandmarkPolicy fixed(std::size_t m) { return {Kind::Fixed, m, 1.0, 0.1}; }
};

std::string to_string(LandmarkPolicy::Kind kind);
LandmarkPolicy::Kind parse_policy_kind(const std::string& name);

struct CellOptions {
    int restarts = 20;       // best-of restarts for exact_erm_approx and nystrom
    int search_rounds = -1;  // -1: 25 k
    LloydOptions lloyd;
    int threads = 1;         // output does not depend on this
};

struct CellRecord {
    std::size_t n = 0;
    int k = 0;
    Method method = Method::ExactErmApprox;
    double m_used = 0.0;  // mean landmark count (0 for exact methods)
    int reps = 0;
    double mean_empirical_risk = 0.0;
    double mean_population_risk = 0.0;
    double optimal_risk = 0.0;
    bool optimal_is_surrogate = false;
    double mean_excess_risk = 0.0;
    double std_error = 0.0;
    double mean_generalization_gap = 0.0;
};

struct RepOutcome {
    double empirical_risk = 0.0;
    double population_risk = 0.0;
    std::size_t m_used = 0;
};

/// One rep: draw n atoms with the data stream, fit with `method` using the
/// fit stream, and score the fitted centers under P.
RepOutcome run_rep(const DistributionSpec& p, std::size_t n, int k, Method method, const LandmarkPolicy& policy,
                   std::uint64_t data_seed, std::uint64_t fit_seed, const CellOptions& options = {});

/// Monte Carlo estimate of E[W(C_n, P)] - W*(P) for one (n, k, method) cell.
/// Rep r uses streams derived from (master_seed, n, k, r): the sample is
/// shared across methods (paired comparison), the fit stream is per method.
CellRecord run_cell(const DistributionSpec& p, std::size_t n, int k, Method method, const LandmarkPolicy& policy,
                    int reps, std::uint64_t master_seed, const CellOptions& options = {},
                    std::optional<OptimalRisk> optimal = std::nullopt);

struct ScalingFit {
    double exponent = 0.0;
    double half_width = 0.0;  // 2 x slope standard error
    std::size_t cells_used = 0;
    std::size_t cells_excluded = 0;  // nonpositive excess risk
};

enum class ScalingAxis { N, K };

struct RiskReport {
    std::vector<CellRecord> cells;
    std::optional<ScalingFit> n_fit;
    std::optional<ScalingFit> k_fit;

    void write_csv(std::ostream& out) const;
    void write_summary(std::ostream& out) const;
};

/// Least-squares slope of log(mean_excess_risk) against log(axis value), over
/// the cells matching the optional filters. Cells with nonpositive excess are
/// excluded; throws NonPositiveRisk if fewer than 3 remain.
ScalingFit scaling_fit(const RiskReport& report, ScalingAxis axis, std::optional<Method> method = std::nullopt,
                       std::optional<std::size_t> fixed_n = std::nullopt, std::optional<int> fixed_k = std::nullopt);

/// Overlap of [mean - 2 se, mean + 2 se] intervals of excess risk.
bool intervals_overlap(const CellRecord& a, const CellRecord& b);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

struct BetaStudyOptions {
    std::size_t n_min = 5;
    std::size_t n_max = 8;
    int k_min = 2;
    int k_max = 3;
    int rounds = -1;  // -1: 25 k
    bool lloyd_refine = true;
};

struct BetaSummary {
    std::vector<double> ratios;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double p95 = 0.0;
};

/// Ratio of approximate_erm cost to brute_force_erm cost on `instances` tiny
/// samples drawn from P (n <= 8, k <= 3).
BetaSummary beta_ratio_study(const DistributionSpec& p, int instances, Rng& rng, const BetaStudyOptions& options = {});

}  // namespace kkm
