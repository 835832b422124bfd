// intertwining.hpp - building Theta2 from (Theta1, X) with X Theta2 = Theta1 X
//
// Shape convention: X maps H2 -> H1, so X is dim1 x dim2, Theta1 is
// dim1 x dim1 and Theta2 is dim2 x dim2. N1 = X X^dagger lives on H1 and
// N2 = X^dagger X on H2. Indices into eigen-families are 0-based.

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "isospec/operator_core.hpp"
#include "isospec/report.hpp"

namespace isospec::intertwining {

enum class Regime {
    Invertible,           // X^{-1} exists
    InvertibleCommuting,  // X^{-1} exists and [X X^dagger, Theta1] = 0
    NonInvertible,        // X singular, N2 > 0 and [N1, Theta1] = 0
};

std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view s);

struct Tolerances {
    double relation{kDefaultRelationTol};
    double kernel{kDefaultKernelTol};
    double multiplicity{kDefaultMultiplicityTol};
    double degeneracy{1e-8};  // k-tilde values closer than this form one class
};

// Throws RegimeError when none of the three regimes applies.
Regime classify(const Matrix& theta1, const Matrix& x, double tol = kDefaultRelationTol);

// X^{-1} Theta1 X. Throws SingularityError for singular X.
Matrix build_case1(const Matrix& theta1, const Matrix& x);

// Eigenvectors X^{-1} phi_n of the case-1 operator.
Matrix case1_eigenvectors(const Matrix& x, const Matrix& phi1);

// N2^{-1} (X^dagger Theta1 X). Throws RegimeError naming the violated
// precondition (N2 > 0 or [N1, Theta1] = 0).
Matrix build_case3(const Matrix& theta1, const Matrix& x, double tol = kDefaultRelationTol);

struct MappedFamily {
    Matrix phi2;  // columns X^dagger phi1_n
    std::vector<std::size_t> kernel_set;
    RealVector tilde_k;      // (|phi2_n| / |phi1_n|)^2, zero on the kernel set
    RealVector n1_residual;  // |N1 phi1_n - k_n phi1_n|
    RealVector n2_residual;  // |N2 phi2_n - k_n phi2_n|
    // Non-kernel indices grouped by equal k-tilde (within Tolerances::degeneracy).
    std::vector<std::vector<std::size_t>> degeneracy_classes;

    bool in_kernel(std::size_t n) const;
    // True when every k-tilde class is a singleton, in which case the
    // non-kernel phi1 are forced to be mutually orthogonal.
    bool tilde_k_simple() const;
};

// Requires a simple spectrum (SpectrumError otherwise). n is in the kernel
// set iff |X^dagger phi1_n| <= kernel_tol * |X| * |phi1_n|.
MappedFamily map_eigensystem(const Matrix& x, const core::Eigensystem& es,
                             const Tolerances& tol = {});

struct InverseMap {
    Matrix phi1;          // columns (1/k_n) X phi2_n
    RealVector residual;  // against the supplied originals, empty otherwise
};

// Throws KernelError when some k-tilde is not strictly positive.
InverseMap inverse_map(const Matrix& x, const Matrix& phi2, const RealVector& tilde_k,
                       const std::optional<Matrix>& original_phi1 = std::nullopt);

struct IntertwiningModel {
    Matrix theta1;
    Matrix x;
    Matrix theta2;
    Matrix n1;
    Matrix n2;
    Regime regime{Regime::NonInvertible};

    core::Eigensystem eigen1;  // Theta1 eigenvalues and phi1
    Matrix psi1;               // biorthogonal partner of phi1
    Matrix phi2;               // X^dagger phi1 (X^{-1} phi1 in the Invertible regime)
    Matrix psi2;               // X^dagger psi1
    std::vector<std::size_t> kernel_set;
    RealVector tilde_k;
    std::vector<std::vector<std::size_t>> degeneracy_classes;

    std::size_t dim1() const { return static_cast<std::size_t>(theta1.rows()); }
    std::size_t dim2() const { return static_cast<std::size_t>(theta2.rows()); }
    bool in_kernel(std::size_t n) const;

    core::BiorthogonalSystem level1() const;
    // All indices, zero vectors and zero pairing on the kernel set.
    core::BiorthogonalSystem level2() const;
    // Case-2 proportionality constants k_n = 1 / k-tilde_n (0 on the kernel).
    RealVector case2_constants() const;
};

// classify + build_case1/build_case3 + eigensystem mapping. When `supplied`
// is given it is used as the Theta1 eigensystem instead of eig().
IntertwiningModel build_model(const Matrix& theta1, const Matrix& x, const Tolerances& tol = {},
                              const std::optional<core::Eigensystem>& supplied = std::nullopt);

// Populate a model around an externally provided Theta2 (e.g. read from a
// file) without recomputing it, so corrupted inputs show up in the checks.
IntertwiningModel assemble_model(const Matrix& theta1, const Matrix& x, const Matrix& theta2,
                                 Regime regime, const core::Eigensystem& eigen1,
                                 const Tolerances& tol = {});

struct VerifyOptions {
    double tolerance{kDefaultRelationTol};
    // Restrict operator residuals to the leading block x block corner.
    std::optional<std::size_t> block;
    // Eigenvalue matching tolerance for the spectrum-inclusion check.
    double spectrum_tolerance{1e-8};
};

RelationReport verify_relations(const IntertwiningModel& model, const VerifyOptions& opts = {});

// Checks of the regime-3 proposition on self-adjointness transfer plus the
// N1-invertible identities. Parts whose hypotheses fail are reported as not
// applicable. Throws RegimeError in the plain Invertible regime.
RelationReport proposition1_check(const IntertwiningModel& model,
                                  double tol = kDefaultRelationTol);

struct AdjointDescent {
    Matrix descended;       // N2^{-1} (X^dagger Theta1^dagger X)
    Matrix theta2_adjoint;  // Theta2^dagger
    double difference{0.0};
};

AdjointDescent adjoint_descent(const IntertwiningModel& model);

struct CommutingPair {
    Matrix theta1;
    Matrix x;
};

struct PairOptions {
    bool hermitian_theta1{false};
    double min_gap{1e-2};  // resample until eigenvalues are this far apart
};

// Random (Theta1, X) satisfying the regime-3 hypotheses: X is dim1 x dim2 of
// full column rank, N1 has (generically degenerate) positive eigenspaces and
// Theta1 is block diagonal over them. Requires dim1 > dim2 >= 1.
CommutingPair make_commuting_pair(std::size_t dim1, std::size_t dim2, std::uint64_t seed,
                                  const PairOptions& opts = {});

}  // namespace isospec::intertwining
