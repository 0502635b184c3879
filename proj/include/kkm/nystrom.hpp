#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kkm/clustering.hpp"
#include "kkm/rng.hpp"

namespace kkm {

/// Dictionary of m distinct point indices, sorted ascending.
class LandmarkSet {
public:
    LandmarkSet(std::vector<std::size_t> indices, std::size_t n);

    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }

private:
    std::vector<std::size_t> indices_;
};

/// m distinct indices drawn uniformly without replacement. Throws MTooLarge
/// unless 1 <= m <= n.
LandmarkSet sample_landmarks_uniform(std::size_t n, std::size_t m, Rng& rng);

enum class LandmarkMode { General, Eigendecay, LinearK };

std::string to_string(LandmarkMode mode);
LandmarkMode parse_landmark_mode(const std::string& name);

/// Landmark counts from the uniform-sampling prescriptions, clamped to [1, n]:
///   general     c * sqrt(n) * log(1/delta) * min(k, xi) / sqrt(k)
///   eigendecay  c * sqrt(n) * log(1/delta)
///   linear_k    c * sqrt(n) * log(1/delta) * min(k, xi) / k
/// `xi` is the effective dimension (pass k when it is unknown); it is required
/// for general and linear_k. Throws InvalidDelta, MissingXi.
std::size_t landmark_size(std::size_t n, int k, double delta, std::optional<double> xi, LandmarkMode mode,
                          double c_scale = 1.0);

/// Coordinates of every point in an orthonormal basis of H_m = span of the
/// landmark features, plus the squared distance of each point to H_m.
struct EmbeddedDataset {
    Matrix coords;     // n x m
    Vector residuals;  // |Phi_i - P Phi_i|^2, clamped at 0
    double jitter = 0.0;
    /// Numerical rank of the landmark block after the eigenvalue cutoff.
    Eigen::Index rank = 0;
    /// Set when the landmark block lost rank under the cutoff (reported, not fatal).
    bool rank_deficient = false;
    /// Landmark coefficients of the basis: basis vector r is
    /// sum_l basis(l, r) Phi_{landmark l}.
    Matrix basis;

    std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }

    /// Columns z0..z{m-1},residual with a header row.
    void write_csv(std::ostream& out) const;
};

/// Z = K_nm (K_mm + jitter I)^{-1/2}, using the symmetric pseudo-inverse
/// square root with eigenvalues below 1e-10 * lambda_max(K_mm) dropped.
EmbeddedDataset nystrom_embed(const GramMatrix& K, const LandmarkSet& landmarks, double jitter = 0.0);

enum class NystromInit { KMeansPlusPlus, Random };

struct NystromOptions {
    NystromInit init = NystromInit::KMeansPlusPlus;
    LloydOptions lloyd;
};

struct NystromResult {
    Assignment assignment;
    Matrix centers;  // k x m, in embedding coordinates
    ClusterCostTrace trace;
    /// W on the coordinates alone.
    double cost_projected = 0.0;
    /// cost_projected plus mean residual: W(C, P_n) for centers in H_m.
    double cost_in_h = 0.0;
};

/// Weighted Euclidean Lloyd on the rows of `points`, from an initial partition.
/// Same tie-breaking and empty-cluster repair as kernel_lloyd.
NystromResult euclidean_lloyd(const Matrix& points, const Assignment& init, const LloydOptions& options = {},
                              Weights weights = {});

/// Nystrom kernel k-means: Lloyd on the embedded coordinates, seeded by
/// k-means++ or by k distinct uniformly chosen points.
NystromResult nystrom_kkmeans(const EmbeddedDataset& embedded, int k, Rng& rng, const NystromOptions& options = {},
                              Weights weights = {});

/// Same, starting from a given partition (for shared-initialization comparisons).
NystromResult nystrom_kkmeans(const EmbeddedDataset& embedded, const Assignment& init,
                              const LloydOptions& options = {}, Weights weights = {});

/// Feature-space coefficients over the landmarks of each center:
/// center j = sum_l coeffs(j, l) Phi_{landmark l}.
Matrix center_landmark_coefficients(const EmbeddedDataset& embedded, const Matrix& centers);

}  // namespace kkm
