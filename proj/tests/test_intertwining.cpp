#include <doctest.h>

#include <random>

#include "isospec/intertwining.hpp"

using namespace isospec;
using intertwining::Regime;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

// Theta2 through the Moore-Penrose inverse of X, which equals
// N2^{-1} X^dagger when X has full column rank.
Matrix pinv_theta2(const Matrix& theta1, const Matrix& x) {
    return x.completeOrthogonalDecomposition().pseudoInverse() * theta1 * x;
}

}  // namespace

TEST_CASE("regime names round trip") {
    for (Regime r : {Regime::Invertible, Regime::InvertibleCommuting, Regime::NonInvertible}) {
        CHECK(intertwining::regime_from_string(intertwining::to_string(r)) == r);
    }
    CHECK_THROWS_AS(intertwining::regime_from_string("case4"), ParseError);
}

TEST_CASE("classification") {
    const Matrix theta1 = random_matrix(3, 3, 5);
    CHECK(intertwining::classify(theta1, random_matrix(3, 3, 6)) == Regime::Invertible);
    CHECK(intertwining::classify(theta1, Matrix::Identity(3, 3)) == Regime::InvertibleCommuting);
    CHECK(intertwining::classify(theta1, Complex(0, 2) * Matrix::Identity(3, 3)) == Regime::InvertibleCommuting);
    const auto pair = intertwining::make_commuting_pair(5, 3, 1);
    CHECK(intertwining::classify(pair.theta1, pair.x) == Regime::NonInvertible);
    // N1 does not commute with a generic Theta1
    CHECK_THROWS_AS(intertwining::classify(random_matrix(4, 4, 2), random_matrix(4, 2, 3)), RegimeError);
    // rank-deficient X has N2 singular
    Matrix x = Matrix::Zero(3, 2);
    x(0, 0) = 1.0;
    CHECK_THROWS_AS(intertwining::classify(Matrix::Identity(3, 3), x), RegimeError);
}

TEST_CASE("case 1 is a similarity transform") {
    const Matrix theta1 = random_matrix(4, 4, 7);
    const Matrix x = random_matrix(4, 4, 8);
    const Matrix theta2 = intertwining::build_case1(theta1, x);
    CHECK((x * theta2 - theta1 * x).norm() < 1e-11);
    CHECK_THROWS_AS(intertwining::build_case1(theta1, Matrix::Zero(4, 4)), SingularityError);

    const auto es = core::eig(theta1);
    const Matrix phi2 = intertwining::case1_eigenvectors(x, es.vectors);
    for (Eigen::Index n = 0; n < 4; ++n) {
        CHECK((theta2 * phi2.col(n) - es.values(n) * phi2.col(n)).norm() < 1e-10);
    }
}

TEST_CASE("case 3 agrees with the pseudo-inverse") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pair = intertwining::make_commuting_pair(7, 4, seed);
        const Matrix theta2 = intertwining::build_case3(pair.theta1, pair.x);
        CHECK((theta2 - pinv_theta2(pair.theta1, pair.x)).norm() < 1e-9 * (1.0 + theta2.norm()));
        CHECK((pair.x * theta2 - pair.theta1 * pair.x).norm() < 1e-9 * (1.0 + theta2.norm()));
    }
    CHECK_THROWS_AS(intertwining::build_case3(random_matrix(4, 4, 2), random_matrix(4, 2, 3)), RegimeError);
}

TEST_CASE("mapped family: kernel set and k-tilde") {
    // X^dagger kills e_0 of C^3, Theta1 diagonal
    Matrix theta1 = Matrix::Zero(3, 3);
    theta1.diagonal() << 1.0, Complex(2, 1), 3.0;
    Matrix x = Matrix::Zero(3, 2);
    x(1, 0) = 2.0;
    x(2, 1) = 0.5;
    const auto es = core::eig(theta1);
    const auto mf = intertwining::map_eigensystem(x, es);
    REQUIRE(mf.kernel_set.size() == 1);
    CHECK(mf.kernel_set[0] == 0);
    CHECK(mf.in_kernel(0));
    CHECK_FALSE(mf.in_kernel(1));
    CHECK(mf.tilde_k(0) == 0.0);
    CHECK(mf.tilde_k(1) == doctest::Approx(4.0));
    CHECK(mf.tilde_k(2) == doctest::Approx(0.25));
    CHECK(mf.tilde_k_simple());
    CHECK(mf.n1_residual.maxCoeff() < 1e-12);
    CHECK(mf.n2_residual.maxCoeff() < 1e-12);

    const auto inv = intertwining::inverse_map(x, mf.phi2.rightCols(2), mf.tilde_k.tail(2),
                                               Matrix(es.vectors.rightCols(2)));
    CHECK(inv.residual.maxCoeff() < 1e-12);
    CHECK_THROWS_AS(intertwining::inverse_map(x, mf.phi2, mf.tilde_k), KernelError);

    Matrix rep = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(intertwining::map_eigensystem(Matrix::Identity(2, 2), core::eig(rep)), SpectrumError);
}

TEST_CASE("random commuting pairs pass every relation") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d2 = 1 + rng() % 6;
        const std::size_t d1 = d2 + 1 + rng() % 4;
        intertwining::PairOptions po;
        po.hermitian_theta1 = (trial % 3 == 0);
        const auto pair = intertwining::make_commuting_pair(d1, d2, rng(), po);
        const auto model = intertwining::build_model(pair.theta1, pair.x);
        CAPTURE(trial);
        CHECK(model.regime == Regime::NonInvertible);
        CHECK(model.dim1() == d1);
        CHECK(model.dim2() == d2);
        CHECK(model.kernel_set.size() == d1 - d2);
        const auto rep = intertwining::verify_relations(model);
        for (const Relation* r : rep.failures()) MESSAGE(r->name << " " << r->residual);
        CHECK(rep.all_passed());
        const auto prop = intertwining::proposition1_check(model);
        CHECK(prop.all_passed());
        const auto ad = intertwining::adjoint_descent(model);
        CHECK(ad.difference < 1e-8 * (1.0 + model.theta2.norm()));
        // level-2 pairing equals k-tilde on every index
        const auto l2 = model.level2();
        const Matrix g = l2.phi.adjoint() * l2.psi;
        for (Eigen::Index n = 0; n < g.rows(); ++n) {
            CHECK(std::abs(g(n, n) - model.tilde_k(n)) < 1e-8 * (1.0 + model.tilde_k(n)));
        }
    }
}

TEST_CASE("hermitian seed gives self-adjoint Theta2") {
    intertwining::PairOptions po;
    po.hermitian_theta1 = true;
    const auto pair = intertwining::make_commuting_pair(6, 3, 9, po);
    const auto model = intertwining::build_model(pair.theta1, pair.x);
    CHECK(core::is_self_adjoint(model.theta2, 1e-9));
}

TEST_CASE("plain invertible regime has no proposition check") {
    const auto model = intertwining::build_model(random_matrix(3, 3, 1), random_matrix(3, 3, 2));
    CHECK(model.regime == Regime::Invertible);
    CHECK(model.kernel_set.empty());
    CHECK(intertwining::verify_relations(model).all_passed());
    CHECK_THROWS_AS(intertwining::proposition1_check(model), RegimeError);
}

TEST_CASE("corrupted Theta2 is caught") {
    const auto pair = intertwining::make_commuting_pair(5, 3, 4);
    const auto good = intertwining::build_model(pair.theta1, pair.x);
    Matrix bad = good.theta2;
    bad(0, 1) += 1e-3;
    const auto model = intertwining::assemble_model(pair.theta1, pair.x, bad, good.regime, good.eigen1);
    CHECK_FALSE(intertwining::verify_relations(model).all_passed());
}

TEST_CASE("case-2 constants invert k-tilde") {
    const auto pair = intertwining::make_commuting_pair(6, 4, 12);
    const auto model = intertwining::build_model(pair.theta1, pair.x);
    const RealVector k = model.case2_constants();
    for (Eigen::Index n = 0; n < k.size(); ++n) {
        if (model.in_kernel(static_cast<std::size_t>(n))) {
            CHECK(k(n) == 0.0);
        } else {
            CHECK(k(n) * model.tilde_k(n) == doctest::Approx(1.0));
        }
    }
}
