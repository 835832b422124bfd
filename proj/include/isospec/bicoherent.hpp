// bicoherent.hpp - ladder operators, bicoherent states, moment measures and
// coherent-state quantization over truncated biorthogonal families.
//
// All sums run over the first `order` vectors of a family. Inner products are
// conjugate-linear in the first slot: <f, g> = f^dagger g.

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "isospec/operator_core.hpp"

namespace isospec::coherent {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct LadderPair {
    Matrix lowering;  // A
    Matrix raising;   // B
    int level{1};
};

// A = sum_{k>=1} sqrt(eps_k) |phi_{k-1}><psi_k|,
// B = sum_{k>=0} sqrt(eps_{k+1}) |phi_{k+1}><psi_k|.
// Needs unit pairing and 0 = eps_0 < eps_1 < ...
LadderPair build_ladders(const core::BiorthogonalSystem& sys, const core::EpsilonSequence& eps);

// Level-2 ladders for a family with <phi_k, psi_n> = k_n delta_kn:
// A phi_k = sqrt(eps_k k_k / k_{k-1}) phi_{k-1}, B phi_k = sqrt(eps_{k+1} k_k / k_{k+1}) phi_{k+1}.
// Throws KernelError if some k_n is zero (filter the family first).
LadderPair build_ladders_level2(const core::BiorthogonalSystem& sys2, const core::EpsilonSequence& eps,
                                const RealVector& tilde_k);

struct GrowthFit {
    double r{1.0};
    double alpha{0.0};
};

struct GrowthGrid {
    double alpha_step{1.0 / 64.0};  // alpha in {0, step, 2 step, ..., 1/2}
    std::size_t tail{8};            // window used to detect growing requirements
    double r_floor{1e-12};
};

// Smallest alpha on the grid for which the per-index requirement
// (|v_n| / (eps_n!)^alpha)^(1/n) stops growing over the tail window, then the
// smallest r satisfying |v_n| <= r^n (eps_n!)^alpha for every n. Throws
// GrowthError when no alpha <= 1/2 works or |v_0| > 1.
GrowthFit fit_norm_growth(const Matrix& family, const core::EpsilonSequence& eps,
                          const GrowthGrid& grid = {});

struct ConvergenceData {
    double r_phi{1.0};
    double r_psi{1.0};
    double alpha_phi{0.0};
    double alpha_psi{0.0};
    double rho_phi{kInfinity};
    double rho_psi{kInfinity};
    double rho_hat{kInfinity};
    double rho{kInfinity};
};

// Tail limit of a sequence from its last `tail` terms: constant tails return
// the last value; monotone tails whose successive increments shrink by a
// ratio q < 0.9 are extrapolated geometrically; slower growth is declared
// divergent (+inf).
double estimate_limit(const std::vector<double>& seq, std::size_t tail = 8);

ConvergenceData radius(const GrowthFit& phi, const GrowthFit& psi, const core::EpsilonSequence& eps,
                       std::size_t tail = 8);

struct BicoherentState {
    Complex z;
    std::size_t order{0};
    double normalization{1.0};  // N(|z|)
    Vector coefficients;        // N z^k / sqrt(eps_k! c_k)
    Vector phi;
    Vector psi;
    // Norm of the boundary term |z| |c_{K-1}| |v_{K-1}| that the lowering
    // operator pushes out of the truncated span (K = order); bounds the
    // eigenstate residual of the truncated state.
    double tail_bound{0.0};
    // Estimated weight of the omitted terms in N(|z|)^{-2}, relative to the sum.
    double normalization_tail{0.0};
    // |z|^2 / eps_K: ratio of consecutive normalization terms at the cut.
    double last_ratio{0.0};
    bool converged{true};  // last_ratio <= 0.9

    Complex overlap() const { return phi.dot(psi); }
};

// Level-1 pair from unit-paired families. |z| must be below rho.
BicoherentState coherent_pair(const core::BiorthogonalSystem& sys, const core::EpsilonSequence& eps,
                              Complex z, std::size_t order, double rho = kInfinity);

// Level-2 pair with coefficients z^k / sqrt(eps_k! k_k). Throws KernelError
// when a k_k vanishes; use filter_and_build for such families.
BicoherentState coherent_pair_level2(const core::BiorthogonalSystem& sys2,
                                     const core::EpsilonSequence& eps, const RealVector& tilde_k,
                                     Complex z, std::size_t order, double rho = kInfinity);

enum class TildeFactorial {
    // eps~_l! = eps_{n_l}!, the factorial along the original sequence.
    OriginalSequence,
    // eps~_l! = prod_{j=1..l} eps_{n_j}, the factorial of the relabeled sequence.
    Relabeled,
};

struct FilteredState {
    BicoherentState state;
    std::vector<std::size_t> survivors;  // n_0 < n_1 < ... outside the kernel set
    std::vector<double> log_factorials;  // log eps~_l! for l < order
    RealVector tilde_k;                  // relabeled pairing constants
    double biorthogonality_defect{0.0};
};

// Relabel the indices outside `kernel_set` and build the pair of the
// surviving family. Throws DegenerateError when nothing survives.
FilteredState filter_and_build(const core::BiorthogonalSystem& sys2, const core::EpsilonSequence& eps,
                               const RealVector& tilde_k, const std::vector<std::size_t>& kernel_set,
                               Complex z, std::size_t order,
                               TildeFactorial convention = TildeFactorial::OriginalSequence,
                               double rho = kInfinity);

// d lambda(r) = c r^a exp(-b r^p) dr on [0, inf) together with a quadrature
// rule int d lambda(r) h(r) ~ sum_i w_i h(r_i).
struct RadialMeasure {
    double c{0.0};
    double a{1.0};
    double b{0.0};
    double p{2.0};
    double slope{0.0};  // s in eps_k = s k
    std::vector<double> radii;
    std::vector<double> weights;
    // |int d lambda r^{2k} - eps_k!/(2 pi)| / (eps_k!/(2 pi)) for k = 0..order.
    std::vector<double> moment_residuals;

    double density(double r) const;
    // Quadrature value of int d lambda(r) r^{2k}.
    double moment(std::size_t k) const;
    // log of moment(k), safe for large k.
    double log_moment(std::size_t k) const;
    RadialMeasure scaled(double factor) const;
};

// Closed-form measure for the linear family eps_k = s k:
// d lambda(r) = r exp(-r^2/s) / (pi s) dr, integrated by Gauss-Laguerre in
// t = r^2 / s. Throws NoClosedFormError for any other sequence.
RadialMeasure solve_moment_measure(const core::EpsilonSequence& eps, std::size_t order,
                                   std::size_t nodes = 64);

// Measure for the level-2 moment problem eps_k! k_k / (2 pi); available only
// when k_k is constant (the measure is then rescaled).
RadialMeasure solve_level2_measure(const core::EpsilonSequence& eps, const RealVector& tilde_k,
                                   std::size_t order, std::size_t nodes = 64);

struct ResolutionResult {
    Complex lhs;  // disk integral evaluated by radial quadrature
    Complex rhs;  // <f, g> (level 1) or sum_k <f, phi_k><psi_k, g> (level 2)
    double residual{0.0};
    Complex identity_value;  // <f, g>, for comparison in the level-2 case
};

// int d nu N^{-2} <f, phi(z)><psi(z), g>; the angular integral is done
// exactly, leaving 2 pi sum_k <f,phi_k><psi_k,g> moment_k / eps_k!.
ResolutionResult resolution_check(const core::BiorthogonalSystem& sys, const core::EpsilonSequence& eps,
                                  const RadialMeasure& measure, const Vector& f, const Vector& g,
                                  std::size_t order);

// Level-2 analogue; `measure` must solve the eps_k! k_k / (2 pi) moment problem.
ResolutionResult resolution_check_level2(const core::BiorthogonalSystem& sys2,
                                         const core::EpsilonSequence& eps, const RealVector& tilde_k,
                                         const RadialMeasure& measure, const Vector& f, const Vector& g,
                                         std::size_t order);

// Sum form sum_k <f, phi_k><psi_k, g> against <f, g>, used when no measure exists.
ResolutionResult resolution_sum_form(const core::BiorthogonalSystem& sys, const Vector& f,
                                     const Vector& g, std::size_t order);

enum class Symbol { Z, ZBar };

Symbol symbol_from_string(std::string_view s);
std::string_view to_string(Symbol s);

struct QuantizedOperator {
    Matrix coefficients;  // <psi_m | Op | phi_n>, order x order
    Matrix op;            // sum_{mn} C_mn |phi_m><psi_n| in the ambient basis
};

QuantizedOperator quantize(Symbol symbol, const core::BiorthogonalSystem& sys,
                           const core::EpsilonSequence& eps, const RadialMeasure& measure,
                           std::size_t order);

// <psi_m | op | phi_n> for the first `order` vectors.
Matrix coefficients_in(const core::BiorthogonalSystem& sys, const Matrix& op, std::size_t order);

}  // namespace isospec::coherent
