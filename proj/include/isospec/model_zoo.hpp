// model_zoo.hpp - worked examples as parametric fixtures, pseudo-fermion
// pairs and the nonlinear pseudo-boson verifier.
//
// Fixture eigen-families are 0-based: index n here is index n+1 in the usual
// 1-based labelling of the examples.

#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isospec/intertwining.hpp"
#include "isospec/operator_core.hpp"
#include "isospec/report.hpp"

namespace isospec::zoo {

struct Fixture {
    std::string id;
    std::vector<std::pair<std::string, Complex>> parameters;
    std::size_t truncation{0};
    intertwining::IntertwiningModel model;
    intertwining::VerifyOptions verify;  // block and tolerance the fixture is documented at
    // Ladder sequence for fixtures that carry one (shift, coherent_demo).
    std::optional<core::EpsilonSequence> eps;
    // Fixture-specific expectations: closed forms, kernel sets, pairings.
    RelationReport checks;

    const Complex* parameter(const std::string& name) const;
};

// X = [[x11, x12], [-conj(x12), conj(x11)]]. Uses `theta1` when given, a
// fixed non-self-adjoint 2x2 matrix otherwise. Throws DegenerateError for X = 0.
Fixture fixture_2x2(Complex x11, Complex x12, const std::optional<Matrix>& theta1 = std::nullopt);

// The three printed eigenvectors as columns.
Matrix ex3x3_eigenvectors();
Matrix ex3x3_x();
// Theta1 of the 3x3 example, transcribed entrywise (corrected transcription).
Matrix ex3x3_theta1_closed_form(double e1, double e2, double e3);
// Theta1 exactly as printed, including its misprinted entries.
Matrix ex3x3_theta1_as_printed(double e1, double e2, double e3);
// Closed-form Theta2 of the 3x3 example.
Matrix ex3x3_theta2_closed_form(double e1, double e2, double e3);

// Theta1 = Phi diag(E) Phi^{-1} from the printed eigenvectors, then the
// regime-3 pipeline. Throws SpectrumError for repeated E.
Fixture fixture_3x3(double e1, double e2, double e3);

// Theta1 = sum eps_n e^{i theta_n} |e_n><e_n| on n modes and
// X = sum sqrt(eps_{n+1}) |e_{n+1}><e_n| : C^{n-1} -> C^n.
Fixture fixture_shift(const core::EpsilonSequence& eps, const std::vector<double>& theta, std::size_t n);

struct BlockOperators {
    Matrix theta1;  // 2N x 2N, blocks [[alpha_j, beta_j], [beta_j, alpha_j]]
    Matrix x;       // 2N x N, (X f)_j = <eta_j, f> with eta_{2n} = eta_{2n+1} = e_n / sqrt 2
};

BlockOperators block_operators(const std::vector<Complex>& alpha, const std::vector<Complex>& beta,
                               std::size_t n);

// Pair-swap permutation on 2N modes.
Matrix pair_swap(std::size_t n);

Fixture fixture_block(const std::vector<Complex>& alpha, const std::vector<Complex>& beta, std::size_t n);

// Block fixture with alpha_k = (4k-3) alpha1, beta_k = alpha1 (k = 1..N),
// whose Theta1 eigenvalues are 2 n alpha1, n = 0..2N-1, in family order.
Fixture coherent_demo(double alpha1, std::size_t blocks);

struct PseudoFermionPair {
    Matrix a;
    Matrix b;
    Complex alpha;
    Complex beta;
    Complex alpha12;
    Complex beta12;
    Complex gamma;  // 1 / (alpha - beta), a root of gamma^2 = -alpha12 beta12
    RelationReport checks;

    // omega b a + rho 1
    Matrix hamiltonian(Complex omega, Complex rho) const;
    // [[w g alpha + rho, w g], [-w g alpha beta, -w g beta + rho]] with w g = omega_gamma.
    Matrix closed_form(Complex omega_gamma, Complex rho) const;
};

// Throws ParameterError unless (alpha - beta)^2 gamma^2 = 1 within tol.
PseudoFermionPair pseudo_fermion(Complex alpha, Complex beta, Complex alpha12, Complex beta12,
                                 double tol = 1e-9);

struct PseudoFermionParams {
    Complex omega;
    Complex alpha;
    Complex beta;
    Complex rho;
    Complex alpha12;
    Complex beta12;
    Matrix hamiltonian;  // omega b a + rho 1 for these parameters
    double block_residual{0.0};
};

// Parameters turning a [[alpha_j, beta_j], [beta_j, alpha_j]] block into the
// pseudo-fermion form. Throws ParameterError for beta_j = 0.
PseudoFermionParams block_pseudo_fermion_params(Complex alpha_j, Complex beta_j);

struct NlpbResult {
    Matrix phi;  // Phi_n = b^n Phi_0 / sqrt(eps_n!)
    Matrix eta;  // eta_n = (a^dagger)^n eta_0 / sqrt(eps_n!)
    RelationReport report;
    // Condition number of the Phi column matrix: the basis property is only
    // meaningful at truncation through this number.
    double condition_number{0.0};
};

// Throws SeedVectorError when a Phi_0 != 0 or b^dagger eta_0 != 0, or when
// <eta_0, Phi_0> vanishes.
NlpbResult nlpb_verify(const Matrix& a, const Matrix& b, const core::EpsilonSequence& eps,
                       const Vector& phi0, const Vector& eta0, std::size_t n, double tol = 1e-10);

// Truncated annihilation operator with sqrt(k) on the superdiagonal.
Matrix annihilation(std::size_t dim);

std::vector<std::string> fixture_ids();

// Build a fixture by id. `params` is a JSON object; missing entries take the
// documented defaults. Complex values are numbers or [re, im] pairs.
Fixture build_fixture(const std::string& id, const nlohmann::json& params = nlohmann::json::object());

}  // namespace isospec::zoo
