#include "isospec/model_zoo.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "isospec/errors.hpp"

namespace isospec::zoo {

namespace {

using intertwining::IntertwiningModel;

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt6 = std::sqrt(6.0);

double flag(bool ok) { return ok ? 0.0 : 1.0; }

Fixture finish(std::string id, IntertwiningModel model, std::size_t truncation) {
    Fixture f;
    f.id = std::move(id);
    f.model = std::move(model);
    f.truncation = truncation;
    return f;
}

}  // namespace

const Complex* Fixture::parameter(const std::string& name) const {
    for (const auto& [k, v] : parameters) {
        if (k == name) return &v;
    }
    return nullptr;
}

Fixture fixture_2x2(Complex x11, Complex x12, const std::optional<Matrix>& theta1) {
    if (x11 == 0.0 && x12 == 0.0) throw DegenerateError("fixture_2x2: X = 0");
    Matrix x(2, 2);
    x << x11, x12, -std::conj(x12), std::conj(x11);
    Matrix t1(2, 2);
    if (theta1) {
        if (theta1->rows() != 2 || theta1->cols() != 2) throw DimensionError("fixture_2x2: Theta1 must be 2x2");
        t1 = *theta1;
    } else {
        t1 << Complex(1.0, 0.5), 2.0, 0.3, Complex(3.0, -1.0);
    }
    const double xt = std::norm(x11) + std::norm(x12);
    Fixture f = finish("ex2x2", intertwining::build_model(t1, x), 2);
    f.parameters = {{"x11", x11}, {"x12", x12}};

    const Matrix id = Matrix::Identity(2, 2);
    const Matrix xinv = x.inverse();
    f.checks.add("ex2x2.N1_scalar", (f.model.n1 - xt * id).norm(), xt, 1e-12);
    f.checks.add("ex2x2.N2_scalar", (f.model.n2 - xt * id).norm(), xt, 1e-12);
    f.checks.add("ex2x2.det_equals_xtilde", std::abs(x.determinant() - xt), xt, 1e-12);
    f.checks.add("ex2x2.inverse_is_scaled_adjoint", (xinv - x.adjoint() / xt).norm(), xinv.norm(), 1e-12);
    const Matrix via_inverse = intertwining::case1_eigenvectors(x, f.model.eigen1.vectors);
    f.checks.add("ex2x2.inverse_images_are_scaled_phi2", (via_inverse - f.model.phi2 / xt).norm(),
                 via_inverse.norm(), 1e-12);
    f.checks.add("ex2x2.regime_invertible_commuting",
                 flag(f.model.regime == intertwining::Regime::InvertibleCommuting), 1.0, 0.0);
    return f;
}

Matrix ex3x3_eigenvectors() {
    Matrix phi(3, 3);
    phi << -1.0 / kSqrt2 - 1.0 / kSqrt6, -std::sqrt(2.0 / 3.0) - 1.0 / kSqrt2, 1.0 / kSqrt3,
        std::sqrt(2.0 / 3.0), 2.0 * std::sqrt(2.0 / 3.0), 1.0 / kSqrt3,
        1.0 / kSqrt2 - 1.0 / kSqrt6, -std::sqrt(2.0 / 3.0) + 1.0 / kSqrt2, 1.0 / kSqrt3;
    return phi;
}

Matrix ex3x3_x() {
    Matrix x(3, 2);
    x << 0.0, 1.0, -kSqrt3 / 2.0, -0.5, kSqrt3 / 2.0, -0.5;
    return x;
}

namespace {

// Printed entries; `fixed` selects the corrected (1,2), (3,2) prefactors and
// the sign inside the (2,3) E2 coefficient.
Matrix ex3x3_theta1(double e1, double e2, double e3, bool fixed) {
    const double s = kSqrt3;
    const double mid = fixed ? 1.0 / 3.0 : 1.0 / 6.0;
    const double e2_23 = fixed ? -2.0 * (1.0 + s) : -2.0 * (1.0 - s);
    Matrix t(3, 3);
    t(0, 0) = ((5 + s) * e1 - (1 + s) * e2 + 2 * e3) / 6.0;
    t(0, 1) = mid * ((1 + s) * e1 - (2 + s) * e2 + e3);
    t(0, 2) = ((-7 - 3 * s) * e1 + (5 + 3 * s) * e2 + 2 * e3) / 6.0;
    t(1, 0) = ((1 - 2 * s) * e1 + 2 * (-1 + s) * e2 + e3) / 3.0;
    t(1, 1) = (-2 * e1 + 4 * e2 + e3) / 3.0;
    t(1, 2) = ((1 + 2 * s) * e1 + e2_23 * e2 + e3) / 3.0;
    t(2, 0) = ((-7 + 3 * s) * e1 + (5 - 3 * s) * e2 + 2 * e3) / 6.0;
    t(2, 1) = mid * ((1 - s) * e1 + (-2 + s) * e2 + e3);
    t(2, 2) = ((5 - s) * e1 + (-1 + s) * e2 + 2 * e3) / 6.0;
    return t;
}

}  // namespace

Matrix ex3x3_theta1_closed_form(double e1, double e2, double e3) { return ex3x3_theta1(e1, e2, e3, true); }

Matrix ex3x3_theta1_as_printed(double e1, double e2, double e3) { return ex3x3_theta1(e1, e2, e3, false); }

Matrix ex3x3_theta2_closed_form(double e1, double e2, double /*e3*/) {
    const double s = kSqrt3;
    Matrix t(2, 2);
    t(0, 0) = (-(1 + s) * e1 + (5 + s) * e2) / 4.0;
    t(0, 1) = (7 - 3 * s) * (e1 - e2) / 4.0;
    t(1, 0) = -(5 + 3 * s) * (e1 - e2) / 4.0;
    t(1, 1) = ((5 + s) * e1 - (1 + s) * e2) / 4.0;
    return t;
}

Fixture fixture_3x3(double e1, double e2, double e3) {
    Vector values(3);
    values << e1, e2, e3;
    if (!core::has_simple_spectrum(values, kDefaultMultiplicityTol)) {
        throw SpectrumError("fixture_3x3: E1, E2, E3 must be pairwise distinct");
    }
    const Matrix phi = ex3x3_eigenvectors();
    const Matrix theta1 = phi * values.asDiagonal() * phi.inverse();
    const Matrix x = ex3x3_x();
    const auto es = core::eigensystem_from(theta1, values, phi);
    Fixture f = finish("ex3x3", intertwining::build_model(theta1, x, {}, es), 3);
    f.parameters = {{"E1", e1}, {"E2", e2}, {"E3", e3}};
    f.verify.tolerance = 1e-10;

    const double scale = std::max({1.0, std::abs(e1), std::abs(e2), std::abs(e3)});
    const Matrix closed1 = ex3x3_theta1_closed_form(e1, e2, e3);
    f.checks.add("ex3x3.theta1_transcription", (theta1 - closed1).cwiseAbs().maxCoeff(), scale, 1e-10);
    const Matrix closed2 = ex3x3_theta2_closed_form(e1, e2, e3);
    f.checks.add("ex3x3.theta2_closed_form", (f.model.theta2 - closed2).cwiseAbs().maxCoeff(), scale, 1e-9);
    f.checks.add("ex3x3.kernel_set_is_third",
                 flag(f.model.kernel_set == std::vector<std::size_t>{2}), 1.0, 0.0);
    double kdev = 0.0;
    for (Eigen::Index n = 0; n < 2; ++n) kdev = std::max(kdev, std::abs(f.model.tilde_k(n) - 1.5));
    f.checks.add("ex3x3.tilde_k_three_halves", kdev, 1.0, 1e-10);
    f.checks.add("ex3x3.psi3_in_kernel", (x.adjoint() * f.model.psi1.col(2)).norm(), 1.0, 1e-12);
    const Matrix pair2 = f.model.phi2.leftCols(2).adjoint() * f.model.psi2.leftCols(2);
    f.checks.add("ex3x3.pairing_three_halves", (pair2 - 1.5 * Matrix::Identity(2, 2)).norm(), 1.5, 1e-10);
    f.checks.add("ex3x3.N2_three_halves", (f.model.n2 - 1.5 * Matrix::Identity(2, 2)).norm(), 1.5, 1e-12);
    return f;
}

Fixture fixture_shift(const core::EpsilonSequence& eps, const std::vector<double>& theta, std::size_t n) {
    if (n < 2) throw DimensionError("fixture_shift: need at least two modes");
    if (!eps.strictly_increasing()) {
        throw ParameterError("fixture_shift: eps must satisfy 0 = eps_0 < eps_1 < ...");
    }
    if (eps.size() < n || theta.size() < n) {
        throw DimensionError("fixture_shift: eps and theta need one entry per mode");
    }
    const bool any_phase = std::any_of(theta.begin(), theta.begin() + static_cast<long>(n), [](double t) {
        const double k = t / std::numbers::pi;
        return std::abs(k - std::round(k)) > 1e-12;
    });
    if (!any_phase) throw ParameterError("fixture_shift: every theta_n is a multiple of pi");

    const auto d = static_cast<Eigen::Index>(n);
    Vector values(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        values(k) = std::polar(eps[static_cast<std::size_t>(k)], theta[static_cast<std::size_t>(k)]);
    }
    const Matrix theta1 = values.asDiagonal();
    Matrix x = Matrix::Zero(d, d - 1);
    for (Eigen::Index k = 0; k + 1 < d; ++k) x(k + 1, k) = std::sqrt(eps[static_cast<std::size_t>(k + 1)]);
    const auto es = core::eigensystem_from(theta1, values, Matrix::Identity(d, d));
    Fixture f = finish("shift", intertwining::build_model(theta1, x, {}, es), n);
    f.eps = eps;
    f.parameters = {{"N", static_cast<double>(n)}};

    const double top = eps[n - 1];
    RealVector n2_diag(d - 1), n1_diag(d);
    for (Eigen::Index k = 0; k < d; ++k) n1_diag(k) = eps[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 0; k + 1 < d; ++k) n2_diag(k) = eps[static_cast<std::size_t>(k + 1)];
    f.checks.add("shift.N2_diagonal", (f.model.n2 - Matrix(n2_diag.cast<Complex>().asDiagonal())).norm(), top, 1e-12);
    f.checks.add("shift.N1_diagonal", (f.model.n1 - Matrix(n1_diag.cast<Complex>().asDiagonal())).norm(), top, 1e-12);
    f.checks.add("shift.N1_theta1_commute", core::commutator(f.model.n1, theta1).norm(), top * top, 1e-12);
    f.checks.add("shift.Xdag_e0_vanishes", (x.adjoint() * Matrix::Identity(d, d).col(0)).norm(), 1.0, 1e-14);
    double lowering = 0.0;
    for (Eigen::Index k = 1; k < d; ++k) {
        Vector want = Vector::Zero(d - 1);
        want(k - 1) = std::sqrt(eps[static_cast<std::size_t>(k)]);
        lowering = std::max(lowering, (x.adjoint().col(k) - want).norm());
    }
    f.checks.add("shift.Xdag_lowers", lowering, std::sqrt(top), 1e-14);
    f.checks.add("shift.psi_equals_phi", (f.model.psi1 - f.model.eigen1.vectors).norm(), 1.0, 1e-12);
    f.checks.add("shift.theta2_diagonal",
                 (f.model.theta2 - Matrix(values.tail(d - 1).asDiagonal())).cwiseAbs().maxCoeff(), top, 1e-12);
    return f;
}

BlockOperators block_operators(const std::vector<Complex>& alpha, const std::vector<Complex>& beta,
                               std::size_t n) {
    if (n == 0) throw DimensionError("block_operators: need at least one block");
    if (alpha.size() < n || beta.size() < n) {
        throw DimensionError("block_operators: need alpha_j and beta_j for every block");
    }
    const auto d = static_cast<Eigen::Index>(n);
    BlockOperators out{Matrix::Zero(2 * d, 2 * d), Matrix::Zero(2 * d, d)};
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex a = alpha[static_cast<std::size_t>(j)];
        const Complex b = beta[static_cast<std::size_t>(j)];
        out.theta1.block(2 * j, 2 * j, 2, 2) << a, b, b, a;
        out.x(2 * j, j) = 1.0 / kSqrt2;
        out.x(2 * j + 1, j) = 1.0 / kSqrt2;
    }
    return out;
}

Matrix pair_swap(std::size_t n) {
    const auto d = static_cast<Eigen::Index>(n);
    Matrix p = Matrix::Zero(2 * d, 2 * d);
    for (Eigen::Index j = 0; j < d; ++j) {
        p(2 * j, 2 * j + 1) = 1.0;
        p(2 * j + 1, 2 * j) = 1.0;
    }
    return p;
}

Fixture fixture_block(const std::vector<Complex>& alpha, const std::vector<Complex>& beta, std::size_t n) {
    const BlockOperators ops = block_operators(alpha, beta, n);
    const auto d = static_cast<Eigen::Index>(n);
    // Per block: (1,-1)/sqrt2 with alpha-beta, then (1,1)/sqrt2 with alpha+beta.
    Vector values(2 * d);
    Matrix phi = Matrix::Zero(2 * d, 2 * d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex a = alpha[static_cast<std::size_t>(j)];
        const Complex b = beta[static_cast<std::size_t>(j)];
        values(2 * j) = a - b;
        values(2 * j + 1) = a + b;
        phi(2 * j, 2 * j) = 1.0 / kSqrt2;
        phi(2 * j + 1, 2 * j) = -1.0 / kSqrt2;
        phi(2 * j, 2 * j + 1) = 1.0 / kSqrt2;
        phi(2 * j + 1, 2 * j + 1) = 1.0 / kSqrt2;
    }
    const auto es = core::eigensystem_from(ops.theta1, values, phi);
    Fixture f = finish("block", intertwining::build_model(ops.theta1, ops.x, {}, es), 2 * n);
    f.parameters = {{"N", static_cast<double>(n)}};
    f.verify.tolerance = 1e-10;

    double scale = 1.0;
    for (Eigen::Index k = 0; k < values.size(); ++k) scale = std::max(scale, std::abs(values(k)));
    f.checks.add("block.N2_identity", (f.model.n2 - Matrix::Identity(d, d)).norm(), 1.0, 1e-12);
    const Matrix half = 0.5 * (Matrix::Identity(2 * d, 2 * d) + pair_swap(n));
    f.checks.add("block.N1_half_one_plus_P", (f.model.n1 - half).norm(), 1.0, 1e-12);
    Vector diag(d);
    for (Eigen::Index k = 0; k < d; ++k) diag(k) = values(2 * k + 1);
    f.checks.add("block.theta2_diagonal", (f.model.theta2 - Matrix(diag.asDiagonal())).cwiseAbs().maxCoeff(),
                 scale, 1e-10);
    std::vector<std::size_t> even;
    for (std::size_t k = 0; k < n; ++k) even.push_back(2 * k);
    f.checks.add("block.kernel_set_alternate", flag(f.model.kernel_set == even), 1.0, 0.0,
                 "first vector of every block");
    double img = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        img = std::max(img, (f.model.phi2.col(2 * k + 1) - Matrix::Identity(d, d).col(k)).norm());
    }
    f.checks.add("block.phi2_canonical", img, 1.0, 1e-12);
    return f;
}

Fixture coherent_demo(double alpha1, std::size_t blocks) {
    if (!(alpha1 > 0.0)) throw ParameterError("coherent_demo: alpha1 must be positive");
    std::vector<Complex> alpha(blocks), beta(blocks);
    for (std::size_t k = 1; k <= blocks; ++k) {
        alpha[k - 1] = (4.0 * static_cast<double>(k) - 3.0) * alpha1;
        beta[k - 1] = alpha1;
    }
    Fixture f = fixture_block(alpha, beta, blocks);
    f.id = "coherent_demo";
    f.parameters = {{"alpha1", alpha1}, {"N", static_cast<double>(blocks)}};
    f.eps = core::EpsilonSequence::linear(2.0 * alpha1, 2 * blocks);
    double dev = 0.0;
    for (std::size_t n = 0; n < 2 * blocks; ++n) {
        dev = std::max(dev, std::abs(f.model.eigen1.values(static_cast<Eigen::Index>(n)) - (*f.eps)[n]));
    }
    f.checks.add("coherent_demo.eigenvalues_linear", dev, (*f.eps)[2 * blocks - 1], 1e-14);
    return f;
}

Matrix PseudoFermionPair::hamiltonian(Complex omega, Complex rho) const {
    return omega * b * a + rho * Matrix::Identity(2, 2);
}

Matrix PseudoFermionPair::closed_form(Complex omega_gamma, Complex rho) const {
    Matrix h(2, 2);
    h << omega_gamma * alpha + rho, omega_gamma, -omega_gamma * alpha * beta, -omega_gamma * beta + rho;
    return h;
}

PseudoFermionPair pseudo_fermion(Complex alpha, Complex beta, Complex alpha12, Complex beta12, double tol) {
    const Complex gamma2 = -alpha12 * beta12;
    const Complex constraint = (alpha - beta) * (alpha - beta) * gamma2;
    if (!(std::abs(constraint - 1.0) <= tol)) {
        throw ParameterError("pseudo_fermion: (alpha - beta)^2 gamma^2 = " + std::to_string(constraint.real()) +
                             (constraint.imag() != 0.0 ? "+" + std::to_string(constraint.imag()) + "i" : "") +
                             ", expected 1");
    }
    PseudoFermionPair p;
    p.alpha = alpha;
    p.beta = beta;
    p.alpha12 = alpha12;
    p.beta12 = beta12;
    // The root of gamma^2 for which omega b a + rho 1 takes the closed form.
    p.gamma = 1.0 / (alpha - beta);
    p.a.resize(2, 2);
    p.b.resize(2, 2);
    p.a << alpha, 1.0, -alpha * alpha, -alpha;
    p.a *= alpha12;
    p.b << beta, 1.0, -beta * beta, -beta;
    p.b *= beta12;

    const Matrix id = Matrix::Identity(2, 2);
    const double scale = std::max(p.a.norm() * p.b.norm(), 1.0);
    p.checks.add("pf.anticommutator", (p.a * p.b + p.b * p.a - id).norm(), scale, 1e-12);
    p.checks.add("pf.a_squared", (p.a * p.a).norm(), p.a.norm() * p.a.norm(), 1e-12);
    p.checks.add("pf.b_squared", (p.b * p.b).norm(), p.b.norm() * p.b.norm(), 1e-12);
    p.checks.add("pf.constraint", std::abs(constraint - 1.0), 1.0, tol);
    const Matrix h = p.hamiltonian(1.0, 0.0);
    p.checks.add("pf.closed_form", (h - p.closed_form(p.gamma, 0.0)).norm(), h.norm(), 1e-12);
    return p;
}

PseudoFermionParams block_pseudo_fermion_params(Complex alpha_j, Complex beta_j) {
    if (beta_j == 0.0) throw ParameterError("block_pseudo_fermion_params: beta_j must be nonzero");
    PseudoFermionParams out;
    out.omega = 2.0 * beta_j;
    out.alpha = 1.0;
    out.beta = -1.0;
    out.rho = alpha_j - beta_j;
    out.alpha12 = 0.5;
    out.beta12 = -0.5;
    const PseudoFermionPair pf = pseudo_fermion(out.alpha, out.beta, out.alpha12, out.beta12);
    out.hamiltonian = pf.hamiltonian(out.omega, out.rho);
    Matrix block(2, 2);
    block << alpha_j, beta_j, beta_j, alpha_j;
    out.block_residual = (out.hamiltonian - block).cwiseAbs().maxCoeff();
    return out;
}

Matrix annihilation(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix a = Matrix::Zero(d, d);
    for (Eigen::Index k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

NlpbResult nlpb_verify(const Matrix& a, const Matrix& b, const core::EpsilonSequence& eps, const Vector& phi0,
                       const Vector& eta0, std::size_t n, double tol) {
    const auto d = a.rows();
    if (a.cols() != d || b.rows() != d || b.cols() != d || phi0.size() != d || eta0.size() != d) {
        throw DimensionError("nlpb_verify: a, b, Phi_0 and eta_0 must share one dimension");
    }
    if (n == 0 || static_cast<Eigen::Index>(n) > d) throw DimensionError("nlpb_verify: need 1 <= N <= dim");
    if (eps.size() < n || !eps.strictly_increasing()) {
        throw ParameterError("nlpb_verify: eps must be strictly increasing from 0 with N terms");
    }
    const double a_scale = std::max(core::op_norm(a), 1.0);
    const double b_scale = std::max(core::op_norm(b), 1.0);
    const double p1 = (a * phi0).norm();
    if (phi0.norm() == 0.0 || p1 > tol * a_scale * phi0.norm()) {
        throw SeedVectorError("nlpb_verify: p1 fails, |a Phi_0| = " + std::to_string(p1));
    }
    const double p2 = (b.adjoint() * eta0).norm();
    if (eta0.norm() == 0.0 || p2 > tol * b_scale * eta0.norm()) {
        throw SeedVectorError("nlpb_verify: p2 fails, |b^dagger eta_0| = " + std::to_string(p2));
    }
    const Complex overlap = eta0.dot(phi0);
    if (std::abs(overlap) <= tol * phi0.norm() * eta0.norm()) {
        throw SeedVectorError("nlpb_verify: <eta_0, Phi_0> vanishes");
    }

    NlpbResult out;
    const auto m = static_cast<Eigen::Index>(n);
    out.phi = Matrix::Zero(d, m);
    out.eta = Matrix::Zero(d, m);
    out.phi.col(0) = phi0;
    // eta_0 rescaled so that <eta_0, Phi_0> = 1.
    out.eta.col(0) = eta0 / std::conj(overlap);
    for (Eigen::Index k = 1; k < m; ++k) {
        const double s = std::sqrt(eps[static_cast<std::size_t>(k)]);
        out.phi.col(k) = b * out.phi.col(k - 1) / s;
        out.eta.col(k) = a.adjoint() * out.eta.col(k - 1) / s;
    }

    const double top = eps[n - 1];
    out.report.add("nlpb.p1.a_phi0", p1, a_scale * phi0.norm(), tol);
    out.report.add("nlpb.p2.bdag_eta0", p2, b_scale * eta0.norm(), tol);
    const Matrix m_op = b * a;
    for (Eigen::Index k = 0; k < m; ++k) {
        const double e = eps[static_cast<std::size_t>(k)];
        const std::string idx = "[" + std::to_string(k) + "]";
        Vector lower_phi = a * out.phi.col(k);
        Vector lower_eta = b.adjoint() * out.eta.col(k);
        if (k > 0) {
            lower_phi -= std::sqrt(e) * out.phi.col(k - 1);
            lower_eta -= std::sqrt(e) * out.eta.col(k - 1);
        }
        const double pn = std::max(out.phi.col(k).norm(), 1.0);
        const double en = std::max(out.eta.col(k).norm(), 1.0);
        out.report.add("nlpb.p3.a_phi" + idx, lower_phi.norm(), a_scale * pn, tol);
        out.report.add("nlpb.p3.bdag_eta" + idx, lower_eta.norm(), b_scale * en, tol);
        out.report.add("nlpb.M_phi" + idx, (m_op * out.phi.col(k) - e * out.phi.col(k)).norm(),
                       std::max(top, 1.0) * pn, tol);
        out.report.add("nlpb.Mdag_eta" + idx, (m_op.adjoint() * out.eta.col(k) - e * out.eta.col(k)).norm(),
                       std::max(top, 1.0) * en, tol);
        if (k > 0) {
            // Theta2 = a b keeps the eigenvalue and shifts the vector: a Phi_k.
            const Vector shifted = a * out.phi.col(k);
            out.report.add("nlpb.shift.ab_eigen" + idx, (a * (b * shifted) - e * shifted).norm(),
                           std::max(top, 1.0) * std::max(shifted.norm(), 1.0), tol);
        }
    }
    const Matrix gram = out.eta.adjoint() * out.phi;
    out.report.add("nlpb.biorthogonality", (gram - Matrix::Identity(m, m)).cwiseAbs().maxCoeff(), 1.0, tol);

    Eigen::JacobiSVD<Matrix> svd(out.phi);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    out.condition_number = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    return out;
}

std::vector<std::string> fixture_ids() { return {"ex2x2", "ex3x3", "shift", "block", "coherent_demo"}; }

namespace {

Complex json_complex(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ParseError("parameter '" + key + "': expected a number or [re, im]");
}

Complex get_complex(const nlohmann::json& p, const std::string& key, Complex def) {
    return p.contains(key) ? json_complex(p.at(key), key) : def;
}

double get_real(const nlohmann::json& p, const std::string& key, double def) {
    if (!p.contains(key)) return def;
    const Complex c = json_complex(p.at(key), key);
    if (c.imag() != 0.0) throw ParseError("parameter '" + key + "' must be real");
    return c.real();
}

std::size_t get_count(const nlohmann::json& p, const std::string& key, std::size_t def) {
    const double v = get_real(p, key, static_cast<double>(def));
    if (!(v >= 1.0) || v != std::floor(v)) throw ParseError("parameter '" + key + "' must be a positive integer");
    return static_cast<std::size_t>(v);
}

std::optional<std::vector<Complex>> get_list(const nlohmann::json& p, const std::string& key) {
    if (!p.contains(key)) return std::nullopt;
    const auto& v = p.at(key);
    if (!v.is_array()) throw ParseError("parameter '" + key + "' must be a list");
    std::vector<Complex> out;
    for (const auto& e : v) out.push_back(json_complex(e, key));
    return out;
}

void reject_unknown(const nlohmann::json& p, std::initializer_list<const char*> known, const std::string& id) {
    if (!p.is_object()) throw ParseError("fixture parameters must be an object");
    for (auto it = p.begin(); it != p.end(); ++it) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
            throw ParseError("fixture " + id + ": unknown parameter '" + it.key() + "'");
        }
    }
}

std::vector<double> real_list(const std::vector<Complex>& v, const std::string& key) {
    std::vector<double> out;
    for (Complex c : v) {
        if (c.imag() != 0.0) throw ParseError("parameter '" + key + "' must be real");
        out.push_back(c.real());
    }
    return out;
}

}  // namespace

Fixture build_fixture(const std::string& id, const nlohmann::json& params) {
    if (id == "ex2x2") {
        reject_unknown(params, {"x11", "x12"}, id);
        return fixture_2x2(get_complex(params, "x11", 1.0), get_complex(params, "x12", Complex(0.0, 1.0)));
    }
    if (id == "ex3x3") {
        reject_unknown(params, {"E1", "E2", "E3"}, id);
        return fixture_3x3(get_real(params, "E1", 1.0), get_real(params, "E2", 2.0), get_real(params, "E3", 3.0));
    }
    if (id == "shift") {
        reject_unknown(params, {"N", "slope", "eps", "theta", "theta_step"}, id);
        const std::size_t n = get_count(params, "N", 8);
        std::vector<double> eps;
        if (auto l = get_list(params, "eps")) {
            eps = real_list(*l, "eps");
        } else {
            const double s = get_real(params, "slope", 1.0);
            for (std::size_t k = 0; k < n; ++k) eps.push_back(s * static_cast<double>(k));
        }
        std::vector<double> theta;
        if (auto l = get_list(params, "theta")) {
            theta = real_list(*l, "theta");
        } else {
            const double step = get_real(params, "theta_step", 0.7);
            for (std::size_t k = 0; k < n; ++k) theta.push_back(step * static_cast<double>(k));
        }
        Fixture f = fixture_shift(core::EpsilonSequence(eps), theta, n);
        return f;
    }
    if (id == "block") {
        reject_unknown(params, {"N", "alpha", "beta"}, id);
        const std::size_t n = get_count(params, "N", 4);
        std::vector<Complex> alpha, beta;
        if (auto l = get_list(params, "alpha")) {
            alpha = *l;
        } else {
            for (std::size_t j = 1; j <= n; ++j) alpha.emplace_back(static_cast<double>(j), 0.0);
        }
        if (auto l = get_list(params, "beta")) {
            beta = *l;
        } else {
            for (std::size_t j = 1; j <= n; ++j) beta.emplace_back(0.0, 0.5 * static_cast<double>(j));
        }
        return fixture_block(alpha, beta, n);
    }
    if (id == "coherent_demo") {
        reject_unknown(params, {"alpha1", "N"}, id);
        return coherent_demo(get_real(params, "alpha1", 1.0), get_count(params, "N", 30));
    }
    throw ParseError("unknown fixture '" + id + "'");
}

}  // namespace isospec::zoo
