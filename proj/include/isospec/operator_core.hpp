// operator_core.hpp - dense complex operators, eigensystems, biorthogonal families
//
// Vector families are stored as the columns of a Matrix throughout the
// library: column n of `phi` is the n-th vector of the family.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

#include "isospec/errors.hpp"

namespace isospec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultKernelTol = 1e-10;
inline constexpr double kDefaultMultiplicityTol = 1e-8;
inline constexpr double kDefaultRelationTol = 1e-9;
inline constexpr std::size_t kDefaultTruncation = 40;

}  // namespace isospec

namespace isospec::core {

Matrix adjoint(const Matrix& m);

// AB - BA; both operands square and of equal size.
Matrix commutator(const Matrix& a, const Matrix& b);

// Largest singular value.
double op_norm(const Matrix& m);

// True when every entry is finite.
bool all_finite(const Matrix& m);

// Orthonormal basis (as columns) of the numerical null space of `m`,
// i.e. right singular vectors with sigma <= tol * sigma_max. The result has
// zero columns when the kernel is trivial.
Matrix kernel_basis(const Matrix& m, double tol = kDefaultKernelTol);

struct Eigensystem {
    Vector values;
    Matrix vectors;  // columns, unit norm unless supplied otherwise
    double multiplicity_tolerance{kDefaultMultiplicityTol};
    bool simple_spectrum{true};
    double max_residual{0.0};  // max_n ||M v_n - e_n v_n||

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

// Pairwise gap test |e_i - e_j| > tol for all i != j.
bool has_simple_spectrum(const Vector& values, double tol);

// Rotate `v` so its largest-magnitude component is real and positive.
void fix_phase(Eigen::Ref<Vector> v);

// Full eigendecomposition of a general complex square matrix. Eigenvalues are
// sorted by (real, imag) ascending; every eigenvector has unit norm and the
// phase convention of fix_phase.
Eigensystem eig(const Matrix& m, double multiplicity_tolerance = kDefaultMultiplicityTol);

// Eigensystem for user-supplied eigenvectors: residuals are measured but the
// vectors are not renormalized.
Eigensystem eigensystem_from(const Matrix& m, const Vector& values, const Matrix& vectors,
                             double multiplicity_tolerance = kDefaultMultiplicityTol);

// psi with <phi_k, psi_n> = delta_kn, computed as (Phi^dagger)^{-1}.
Matrix biorthogonal_partner(const Matrix& phi);

// Paired families with <phi_k, psi_n> = pairing_n delta_kn.
struct BiorthogonalSystem {
    Matrix phi;
    Matrix psi;
    Vector values;
    RealVector pairing;

    std::size_t size() const { return static_cast<std::size_t>(phi.cols()); }
    std::size_t dim() const { return static_cast<std::size_t>(phi.rows()); }

    // max_{k,n} |<phi_k, psi_n> - pairing_n delta_kn|
    double pairing_defect() const;
};

// Level-1 system: psi from biorthogonal_partner, all pairing constants 1.
BiorthogonalSystem make_level1_system(const Eigensystem& es);

bool is_self_adjoint(const Matrix& m, double tol);

// Self-adjoint within tol and smallest eigenvalue > tol.
bool is_strictly_positive(const Matrix& m, double tol = kDefaultRelationTol);

// Truncated eigenvalue-like sequence eps_0, eps_1, ..., eps_N with the
// generalized factorial eps_n! = eps_1 * ... * eps_n and eps_0! = 1.
class EpsilonSequence {
public:
    EpsilonSequence() = default;
    explicit EpsilonSequence(std::vector<double> values);

    // eps_k = s * k for k = 0..count-1.
    static EpsilonSequence linear(double slope, std::size_t count);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_.at(k); }
    const std::vector<double>& values() const { return values_; }

    // 0 = eps_0 < eps_1 < eps_2 < ...
    bool strictly_increasing() const { return strictly_increasing_; }

    double factorial(std::size_t n) const;

private:
    std::vector<double> values_;
    bool strictly_increasing_{false};
};

double generalized_factorial(const EpsilonSequence& eps, std::size_t n);

}  // namespace isospec::core
