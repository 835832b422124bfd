#include "isospec/operator_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace isospec::core {

Matrix adjoint(const Matrix& m) { return m.adjoint(); }

Matrix commutator(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        std::ostringstream os;
        os << "commutator: operands must be square and of equal size, got " << a.rows() << "x"
           << a.cols() << " and " << b.rows() << "x" << b.cols();
        throw DimensionError(os.str());
    }
    return a * b - b * a;
}

double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix kernel_basis(const Matrix& m, double tol) {
    const Eigen::Index n = m.cols();
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const RealVector& sigma = svd.singularValues();
    const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
    const double cut = tol * smax;

    // Right singular vectors beyond min(rows, cols) have sigma = 0.
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cut) ++rank;
    }
    if (smax == 0.0) rank = 0;
    Matrix basis = svd.matrixV().rightCols(n - rank);
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        Vector v = basis.col(j);
        fix_phase(v);
        basis.col(j) = v;
    }
    return basis;
}

bool has_simple_spectrum(const Vector& values, double tol) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        for (Eigen::Index j = i + 1; j < values.size(); ++j) {
            if (std::abs(values(i) - values(j)) <= tol) return false;
        }
    }
    return true;
}

void fix_phase(Eigen::Ref<Vector> v) {
    if (v.size() == 0) return;
    double best = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) best = std::max(best, std::abs(v(i)));
    if (best == 0.0) return;
    // First component within rounding of the maximum, so symmetric vectors
    // get a reproducible pivot.
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= best * (1.0 - 1e-10)) {
            pivot = i;
            break;
        }
    }
    const Complex c = v(pivot);
    v *= std::conj(c) / std::abs(c);
    v(pivot) = Complex(v(pivot).real(), 0.0);
}

namespace {

double max_eigen_residual(const Matrix& m, const Vector& values, const Matrix& vectors) {
    double worst = 0.0;
    for (Eigen::Index n = 0; n < values.size(); ++n) {
        const double r = (m * vectors.col(n) - values(n) * vectors.col(n)).norm();
        worst = std::max(worst, r);
    }
    return worst;
}

void require_square(const Matrix& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << who << ": matrix must be square and nonempty, got " << m.rows() << "x" << m.cols();
        throw DimensionError(os.str());
    }
}

}  // namespace

Eigensystem eig(const Matrix& m, double multiplicity_tolerance) {
    require_square(m, "eig");
    if (!m.allFinite()) throw NumericalError("eig: matrix has non-finite entries");

    Eigen::ComplexEigenSolver<Matrix> solver(m, true);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eig: QR iteration did not converge");
    }
    const Vector& raw_values = solver.eigenvalues();
    const Matrix& raw_vectors = solver.eigenvectors();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(raw_values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const Complex x = raw_values(a), y = raw_values(b);
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });

    Eigensystem es;
    es.multiplicity_tolerance = multiplicity_tolerance;
    es.values.resize(raw_values.size());
    es.vectors.resize(m.rows(), m.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto dst = static_cast<Eigen::Index>(i);
        es.values(dst) = raw_values(order[i]);
        Vector v = raw_vectors.col(order[i]);
        const double nrm = v.norm();
        if (nrm == 0.0 || !std::isfinite(nrm)) {
            throw NumericalError("eig: solver returned a null eigenvector");
        }
        v /= nrm;
        fix_phase(v);
        es.vectors.col(dst) = v;
    }
    es.simple_spectrum = has_simple_spectrum(es.values, multiplicity_tolerance);
    es.max_residual = max_eigen_residual(m, es.values, es.vectors);
    if (!std::isfinite(es.max_residual)) {
        std::ostringstream os;
        os << "eig: residual " << es.max_residual << " is not finite";
        throw NumericalError(os.str());
    }
    return es;
}

Eigensystem eigensystem_from(const Matrix& m, const Vector& values, const Matrix& vectors,
                             double multiplicity_tolerance) {
    require_square(m, "eigensystem_from");
    if (vectors.rows() != m.rows() || vectors.cols() != values.size()) {
        throw DimensionError("eigensystem_from: vector family does not match operator/values");
    }
    for (Eigen::Index n = 0; n < vectors.cols(); ++n) {
        if (vectors.col(n).norm() == 0.0) {
            throw DegenerateError("eigensystem_from: zero eigenvector supplied");
        }
    }
    Eigensystem es;
    es.values = values;
    es.vectors = vectors;
    es.multiplicity_tolerance = multiplicity_tolerance;
    es.simple_spectrum = has_simple_spectrum(values, multiplicity_tolerance);
    es.max_residual = max_eigen_residual(m, values, vectors);
    return es;
}

Matrix biorthogonal_partner(const Matrix& phi) {
    if (phi.rows() != phi.cols() || phi.rows() == 0) {
        throw DimensionError("biorthogonal_partner: family must be a square set of columns");
    }
    Eigen::FullPivLU<Matrix> lu(phi.adjoint());
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
        std::ostringstream os;
        os << "biorthogonal_partner: family is rank deficient (rank " << lu.rank() << " of "
           << phi.cols() << ")";
        throw SingularityError(os.str());
    }
    return lu.solve(Matrix::Identity(phi.rows(), phi.cols()));
}

double BiorthogonalSystem::pairing_defect() const {
    Matrix gram = phi.adjoint() * psi;
    for (Eigen::Index n = 0; n < gram.cols(); ++n) gram(n, n) -= pairing(n);
    return gram.cwiseAbs().maxCoeff();
}

BiorthogonalSystem make_level1_system(const Eigensystem& es) {
    BiorthogonalSystem sys;
    sys.phi = es.vectors;
    sys.psi = biorthogonal_partner(es.vectors);
    sys.values = es.values;
    sys.pairing = RealVector::Ones(es.vectors.cols());
    return sys;
}

bool is_self_adjoint(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_strictly_positive(const Matrix& m, double tol) {
    if (m.rows() != m.cols() || m.rows() == 0) return false;
    if (!is_self_adjoint(m, tol)) return false;
    const Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) return false;
    return solver.eigenvalues().minCoeff() > tol;
}

EpsilonSequence::EpsilonSequence(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ParameterError("EpsilonSequence: entries must be finite and nonnegative");
        }
    }
    strictly_increasing_ = !values_.empty() && values_.front() == 0.0;
    for (std::size_t k = 1; k < values_.size() && strictly_increasing_; ++k) {
        if (!(values_[k] > values_[k - 1])) strictly_increasing_ = false;
    }
}

EpsilonSequence EpsilonSequence::linear(double slope, std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k) v[k] = slope * static_cast<double>(k);
    return EpsilonSequence(std::move(v));
}

double EpsilonSequence::factorial(std::size_t n) const {
    if (n >= values_.size()) {
        std::ostringstream os;
        os << "generalized factorial: index " << n << " exceeds truncation " << values_.size();
        throw DimensionError(os.str());
    }
    double prod = 1.0;
    for (std::size_t j = 1; j <= n; ++j) prod *= values_[j];
    return prod;
}

double generalized_factorial(const EpsilonSequence& eps, std::size_t n) { return eps.factorial(n); }

}  // namespace isospec::core
