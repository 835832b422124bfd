#include <doctest.h>

#include <cmath>
#include <random>

#include "isospec/model_zoo.hpp"

using namespace isospec;
using intertwining::Regime;

namespace {

const double kSqrt3 = std::sqrt(3.0);

void require_passed(const RelationReport& rep) {
    for (const Relation* r : rep.failures()) MESSAGE(r->name << ": " << r->residual << " " << r->note);
    CHECK(rep.all_passed());
}

}  // namespace

TEST_CASE("2x2 fixture") {
    const auto f = zoo::fixture_2x2(Complex(1, 1), Complex(0.5, -2));
    CHECK(f.model.regime == Regime::InvertibleCommuting);
    require_passed(f.checks);
    require_passed(intertwining::verify_relations(f.model, f.verify));
    // N1 = (|x11|^2 + |x12|^2) 1
    CHECK(std::abs(f.model.n1(0, 0) - 6.25) < 1e-12);
    CHECK(f.parameter("x11") != nullptr);
    CHECK(f.parameter("nope") == nullptr);
    CHECK_THROWS_AS(zoo::fixture_2x2(0.0, 0.0), DegenerateError);
}

TEST_CASE("3x3 fixture at (1, 2, 3)") {
    const auto f = zoo::fixture_3x3(1, 2, 3);
    CHECK(f.model.regime == Regime::NonInvertible);
    require_passed(f.checks);
    require_passed(intertwining::verify_relations(f.model, f.verify));
    REQUIRE(f.model.kernel_set.size() == 1);
    CHECK(f.model.kernel_set[0] == 2);
    CHECK(f.model.tilde_k(0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(f.model.tilde_k(1) == doctest::Approx(1.5).epsilon(1e-12));
    const Matrix t2 = zoo::ex3x3_theta2_closed_form(1, 2, 3);
    CHECK((f.model.theta2 - t2).cwiseAbs().maxCoeff() < 1e-9);
    // Theta2 keeps E1 and E2 and loses E3
    const auto es2 = core::eig(f.model.theta2);
    CHECK(std::abs(es2.values(0) - 1.0) < 1e-9);
    CHECK(std::abs(es2.values(1) - 2.0) < 1e-9);
}

TEST_CASE("printed partner vector is the computed one") {
    const auto f = zoo::fixture_3x3(1, 2, 3);
    CHECK(f.model.psi1(2, 1).real() == doctest::Approx(-std::sqrt(2.0 / 3.0 + 1.0 / kSqrt3)).epsilon(1e-12));
}

TEST_CASE("3x3 transcription against the eigen-reconstruction") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 3; ++trial) {
        const double e1 = u(rng), e2 = u(rng), e3 = u(rng);
        const Matrix phi = zoo::ex3x3_eigenvectors();
        Vector d(3);
        d << e1, e2, e3;
        const Matrix recon = phi * d.asDiagonal() * phi.inverse();
        const Matrix closed = zoo::ex3x3_theta1_closed_form(e1, e2, e3);
        CHECK((recon - closed).cwiseAbs().maxCoeff() < 1e-10);
        // the printed matrix disagrees at (0,1), (1,2) and (2,1) only
        const Matrix printed = zoo::ex3x3_theta1_as_printed(e1, e2, e3);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const bool misprint = (i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 1);
                const double diff = std::abs(printed(i, j) - recon(i, j));
                CAPTURE(i);
                CAPTURE(j);
                if (misprint) {
                    CHECK(diff > 1e-6);
                } else {
                    CHECK(diff < 1e-10);
                }
            }
        }
        require_passed(zoo::fixture_3x3(e1, e2, e3).checks);
    }
    CHECK_THROWS_AS(zoo::fixture_3x3(1, 1, 2), SpectrumError);
}

TEST_CASE("shift fixture") {
    const auto eps = core::EpsilonSequence::linear(1.0, 10);
    std::vector<double> theta;
    for (int k = 0; k < 10; ++k) theta.push_back(0.3 * k);
    const auto f = zoo::fixture_shift(eps, theta, 10);
    require_passed(f.checks);
    require_passed(intertwining::verify_relations(f.model, f.verify));
    CHECK(f.model.dim1() == 10);
    CHECK(f.model.dim2() == 9);
    CHECK(f.model.kernel_set == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(zoo::fixture_shift(eps, std::vector<double>(10, 0.0), 10), ParameterError);
}

TEST_CASE("block fixture with real alpha and imaginary beta") {
    std::vector<Complex> alpha, beta;
    for (int j = 1; j <= 6; ++j) {
        alpha.emplace_back(j, 0.0);
        beta.emplace_back(0.0, 0.25 * j);
    }
    const auto f = zoo::fixture_block(alpha, beta, 6);
    require_passed(f.checks);
    require_passed(intertwining::verify_relations(f.model, f.verify));
    std::vector<std::size_t> even;
    for (std::size_t n = 0; n < 12; n += 2) even.push_back(n);
    CHECK(f.model.kernel_set == even);
    for (Eigen::Index j = 0; j < 6; ++j) {
        CHECK(std::abs(f.model.theta2(j, j) - (alpha[j] + beta[j])) < 1e-12);
    }
    // eigenvalues come in conjugate pairs alpha -+ beta
    const Vector& e = f.model.eigen1.values;
    for (Eigen::Index j = 0; j < 6; ++j) CHECK(std::abs(e(2 * j) - std::conj(e(2 * j + 1))) < 1e-12);
}

TEST_CASE("block operators with zero parameters give Theta2 = 0") {
    const auto ops = zoo::block_operators(std::vector<Complex>(3, 0.0), std::vector<Complex>(3, 0.0), 3);
    CHECK(intertwining::build_case3(ops.theta1, ops.x).norm() < 1e-14);
    const Matrix p = zoo::pair_swap(3);
    CHECK((p * p - Matrix::Identity(6, 6)).norm() == 0.0);
}

TEST_CASE("coherent demo eigenvalues") {
    const auto f = zoo::coherent_demo(0.5, 10);
    require_passed(f.checks);
    REQUIRE(f.eps);
    for (std::size_t n = 0; n < 20; ++n) {
        CHECK(std::abs(f.model.eigen1.values(static_cast<Eigen::Index>(n)) - double(n)) < 1e-12);
        CHECK((*f.eps)[n] == doctest::Approx(double(n)));
    }
}

TEST_CASE("pseudo-fermions from the 3x3 parameter set") {
    const double e1 = 1.0, e2 = 2.0;
    const double alpha = -2.0 - kSqrt3;
    const double beta = (kSqrt3 + 1.0) / (3.0 * kSqrt3 - 7.0);
    const double a12 = std::sqrt((38.0 - 21.0 * kSqrt3) / 8.0);
    const auto p = zoo::pseudo_fermion(alpha, beta, a12, -a12);
    require_passed(p.checks);
    CHECK((p.a * p.b + p.b * p.a - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK((p.a * p.a).norm() < 1e-12);
    CHECK((p.b * p.b).norm() < 1e-12);
    const Complex omega_gamma = (7.0 - 3.0 * kSqrt3) * (e1 - e2) / 4.0;
    const Matrix h = p.closed_form(omega_gamma, e1);
    CHECK((h - zoo::ex3x3_theta2_closed_form(e1, e2, 3.0)).cwiseAbs().maxCoeff() < 1e-9);
    // omega b a + rho 1 with omega = omega_gamma / gamma
    CHECK((p.hamiltonian(omega_gamma / p.gamma, e1) - h).cwiseAbs().maxCoeff() < 1e-9);
    // spectrum {rho, omega + rho}
    const auto es = core::eig(p.hamiltonian(Complex(2.0, 1.0), 0.5));
    CHECK(std::abs(es.values(0) - 0.5) < 1e-10);
    CHECK(std::abs(es.values(1) - Complex(2.5, 1.0)) < 1e-10);
    CHECK_THROWS_AS(zoo::pseudo_fermion(1.0, 0.0, 1.0, 1.0), ParameterError);
}

TEST_CASE("block pseudo-fermion parameters") {
    const auto p = zoo::block_pseudo_fermion_params(1.0, 2.0);
    Matrix want(2, 2);
    want << 1.0, 2.0, 2.0, 1.0;
    CHECK((p.hamiltonian - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p.omega == Complex(4.0, 0.0));
    CHECK(p.rho == Complex(-1.0, 0.0));
    CHECK(p.block_residual < 1e-12);
    const auto q = zoo::block_pseudo_fermion_params(0.5, Complex(0.0, 1.5));
    CHECK(q.block_residual < 1e-12);
    CHECK_FALSE(core::is_self_adjoint(q.hamiltonian, 1e-6));
    CHECK_THROWS_AS(zoo::block_pseudo_fermion_params(1.0, 0.0), ParameterError);
}

TEST_CASE("NLPB verifier on the truncated boson") {
    const std::size_t d = 12;
    const Matrix a = zoo::annihilation(d);
    const Matrix b = a.adjoint();
    const auto eps = core::EpsilonSequence::linear(1.0, d);
    const Vector e0 = Matrix::Identity(d, d).col(0);
    const auto res = zoo::nlpb_verify(a, b, eps, e0, e0, d);
    require_passed(res.report);
    CHECK((res.phi - Matrix::Identity(d, d)).norm() < 1e-12);
    CHECK((res.eta - Matrix::Identity(d, d)).norm() < 1e-12);
    CHECK(res.condition_number == doctest::Approx(1.0));
    CHECK_THROWS_AS(zoo::nlpb_verify(a, b, eps, Matrix::Identity(d, d).col(1), e0, d), SeedVectorError);
    CHECK_THROWS_AS(zoo::nlpb_verify(a, b, eps, e0, Matrix::Identity(d, d).col(3), d), SeedVectorError);
}

TEST_CASE("NLPB fault injection is localized") {
    const std::size_t d = 10;
    const Matrix a = zoo::annihilation(d);
    Matrix b = a.adjoint();
    b(5, 4) += 0.01;
    const auto eps = core::EpsilonSequence::linear(1.0, d);
    const Vector e0 = Matrix::Identity(d, d).col(0);
    const auto res = zoo::nlpb_verify(a, b, eps, e0, e0, d);
    CHECK_FALSE(res.report.all_passed());
    const Relation* hit = res.report.find("nlpb.p3.a_phi[5]");
    REQUIRE(hit != nullptr);
    CHECK_FALSE(hit->passed);
    CHECK(hit->residual > 1e-3);
    for (int k = 0; k < 5; ++k) {
        const Relation* r = res.report.find("nlpb.p3.a_phi[" + std::to_string(k) + "]");
        REQUIRE(r != nullptr);
        CHECK(r->passed);
    }
}

TEST_CASE("fixture registry") {
    const auto ids = zoo::fixture_ids();
    CHECK(ids.size() == 5);
    for (const auto& id : ids) {
        const auto f = zoo::build_fixture(id);
        CAPTURE(id);
        require_passed(f.checks);
        require_passed(intertwining::verify_relations(f.model, f.verify));
    }
    const auto g = zoo::build_fixture("block", nlohmann::json::parse(R"({"N": 3, "alpha": [1, 2, 3], "beta": [[0, 1], [0, 2], [0, 3]]})"));
    CHECK(g.model.dim2() == 3);
    CHECK_THROWS_AS(zoo::build_fixture("nope"), ParseError);
    CHECK_THROWS_AS(zoo::build_fixture("ex2x2", nlohmann::json::parse(R"({"x13": 1})")), ParseError);
}
