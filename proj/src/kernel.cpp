#include "kkm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "kkm/csv.hpp"

namespace kkm {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kNormTol = 1e-12;
constexpr double kPsdRelTol = 1e-8;

}  // namespace

KernelSpec KernelSpec::gaussian(double bandwidth) {
    KernelSpec s;
    s.family = KernelFamily::Gaussian;
    s.bandwidth = bandwidth;
    s.validate();
    return s;
}

KernelSpec KernelSpec::linear(bool normalized) {
    KernelSpec s;
    s.family = KernelFamily::Linear;
    s.normalized = normalized;
    return s;
}

KernelSpec KernelSpec::polynomial(int degree, double offset, bool normalized) {
    KernelSpec s;
    s.family = KernelFamily::Polynomial;
    s.degree = degree;
    s.offset = offset;
    s.normalized = normalized;
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    switch (family) {
        case KernelFamily::Gaussian:
            if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
                throw Error(ErrorCode::InvalidArgument, "gaussian bandwidth must be positive");
            break;
        case KernelFamily::Polynomial:
            if (degree < 1) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 1");
            if (!(offset >= 0.0)) throw Error(ErrorCode::InvalidArgument, "polynomial offset must be >= 0");
            break;
        case KernelFamily::Linear:
            break;
    }
}

double KernelSpec::operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
    switch (family) {
        case KernelFamily::Gaussian:
            return std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth * bandwidth));
        case KernelFamily::Linear:
            return x.dot(y);
        case KernelFamily::Polynomial:
            return std::pow(x.dot(y) + offset, degree);
    }
    return 0.0;
}

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::Linear: return "linear";
        case KernelFamily::Polynomial: return "polynomial";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
    if (name == "gaussian") return KernelFamily::Gaussian;
    if (name == "linear") return KernelFamily::Linear;
    if (name == "polynomial") return KernelFamily::Polynomial;
    throw Error(ErrorCode::Config, "unknown kernel family '" + name + "'");
}

GramMatrix::GramMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
        throw Error(ErrorCode::InvalidArgument, "Gram matrix must be square");
    if (!entries_.allFinite()) throw Error(ErrorCode::NonFiniteInput, "Gram matrix has non-finite entries");
    const Eigen::Index n = entries_.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::abs(entries_(i, j) - entries_(j, i)) > kSymmetryTol)
                throw Error(ErrorCode::InvalidArgument, "Gram matrix is not symmetric");
    diag_ = entries_.diagonal();
}

GramMatrix GramMatrix::submatrix(std::span<const std::size_t> indices) const {
    const auto m = static_cast<Eigen::Index>(indices.size());
    Matrix sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        if (indices[a] >= size()) throw Error(ErrorCode::IndexOutOfRange, "submatrix index out of range");
        for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = entries_(indices[a], indices[b]);
    }
    return GramMatrix(std::move(sub));
}

void GramMatrix::write_csv(std::ostream& out) const {
    const Eigen::Index n = entries_.rows();
    for (Eigen::Index j = 0; j < n; ++j) out << (j ? "," : "") << "c" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) out << (j ? "," : "") << format_real(entries_(i, j));
        out << '\n';
    }
}

GramMatrix gram_matrix(const KernelSpec& kernel, const PointSet& points) {
    kernel.validate();
    if (points.rows() == 0) throw Error(ErrorCode::InvalidArgument, "point set is empty");
    if (!points.allFinite()) throw Error(ErrorCode::NonFiniteInput, "input points contain NaN or inf");

    const Eigen::Index n = points.rows();
    if (kernel.normalized && kernel.family != KernelFamily::Gaussian) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double self = kernel(points.row(i).transpose(), points.row(i).transpose());
            if (self > 1.0 + kNormTol)
                throw Error(ErrorCode::NormalizationViolated,
                            "point " + std::to_string(i) + " has kappa(x,x) = " + std::to_string(self) + " > 1");
        }
    }

    Matrix K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector xi = points.row(i).transpose();
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = kernel(xi, points.row(j).transpose());
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return GramMatrix(std::move(K));
}

double kernel_dist_sq(const GramMatrix& K, std::size_t i, std::size_t j) {
    if (i >= K.size() || j >= K.size()) throw Error(ErrorCode::IndexOutOfRange, "kernel_dist_sq index out of range");
    if (i == j) return 0.0;
    return std::max(0.0, K.diag()(i) - 2.0 * K(i, j) + K.diag()(j));
}

Spectrum::Spectrum(const GramMatrix& K) {
    if (K.size() == 0) return;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(K.entries(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::SpectralFailure, "eigen-decomposition did not converge");
    *this = Spectrum(solver.eigenvalues());
}

Spectrum::Spectrum(Vector eigenvalues) : values_(std::move(eigenvalues)) {
    std::sort(values_.data(), values_.data() + values_.size(), std::greater<>());
    if (values_.size() == 0) return;
    smallest_raw_ = values_(values_.size() - 1);
    values_ = values_.cwiseMax(0.0);
}

void check_psd(const GramMatrix& K) {
    const Spectrum s(K);
    if (s.smallest_raw() < -kPsdRelTol * std::max(s.largest(), 0.0))
        throw Error(ErrorCode::SpectralFailure, "matrix is not positive semi-definite within tolerance");
}

double effective_dimension(const Spectrum& spectrum) {
    double xi = 0.0;
    for (double lambda : spectrum.eigenvalues()) xi += lambda / (lambda + 1.0);
    return xi;
}

double effective_dimension(const GramMatrix& K) { return effective_dimension(Spectrum(K)); }

double eigendecay_xi_bound(double c, double alpha, int k) {
    if (!(alpha > 1.0) || !(c > 0.0) || k < 1)
        throw Error(ErrorCode::InvalidDecayParams, "eigendecay bound needs alpha > 1, c > 0, k >= 1");
    return (1.0 + c / (alpha - 1.0)) * std::sqrt(static_cast<double>(k));
}

}  // namespace kkm
