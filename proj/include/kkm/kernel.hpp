#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

#include "kkm/error.hpp"

namespace kkm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Rows of a PointSet are the input points x_1..x_n.
using PointSet = Eigen::MatrixXd;

enum class KernelFamily { Gaussian, Linear, Polynomial };

struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double bandwidth = 1.0;  // gaussian: exp(-|x-y|^2 / (2 bandwidth^2))
    int degree = 2;          // polynomial: (<x,y> + offset)^degree
    double offset = 0.0;
    // Require kappa(x,x) <= 1 for every input (|Phi_x| <= 1).
    bool normalized = false;

    static KernelSpec gaussian(double bandwidth);
    static KernelSpec linear(bool normalized = false);
    static KernelSpec polynomial(int degree, double offset, bool normalized = false);

    /// Throws InvalidArgument on bandwidth <= 0 or degree < 1.
    void validate() const;

    double operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const;
};

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

/// Symmetric positive semi-definite kernel matrix with its diagonal cached.
/// Immutable after construction.
class GramMatrix {
public:
    /// Takes ownership of an explicit matrix. Throws NonFiniteInput on NaN/inf
    /// entries and InvalidArgument when the matrix is not square or not
    /// symmetric within 1e-12.
    explicit GramMatrix(Matrix entries);

    std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    const Vector& diag() const { return diag_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

    /// Principal submatrix on the given indices (in the given order).
    GramMatrix submatrix(std::span<const std::size_t> indices) const;

    void write_csv(std::ostream& out) const;

private:
    Matrix entries_;
    Vector diag_;
};

GramMatrix gram_matrix(const KernelSpec& kernel, const PointSet& points);

/// Squared feature-space distance |Phi_i - Phi_j|^2, clamped at 0.
double kernel_dist_sq(const GramMatrix& K, std::size_t i, std::size_t j);

/// Eigenvalues sorted nonincreasing; round-off negatives are clamped to 0.
class Spectrum {
public:
    explicit Spectrum(const GramMatrix& K);
    /// From raw eigenvalues in any order.
    explicit Spectrum(Vector eigenvalues);

    const Vector& eigenvalues() const { return values_; }
    double largest() const { return values_.size() ? values_(0) : 0.0; }
    double smallest_raw() const { return smallest_raw_; }

private:
    Vector values_;
    double smallest_raw_ = 0.0;
};

/// Throws SpectralFailure when the smallest eigenvalue is below
/// -1e-8 * largest (the matrix is not PSD within tolerance).
void check_psd(const GramMatrix& K);

/// Xi = Tr(K (K + I)^{-1}) = sum_i lambda_i / (lambda_i + 1).
double effective_dimension(const GramMatrix& K);
double effective_dimension(const Spectrum& spectrum);

/// (1 + c / (alpha - 1)) * sqrt(k): upper bound on Xi when lambda_i <= c i^-alpha.
double eigendecay_xi_bound(double c, double alpha, int k);

}  // namespace kkm
