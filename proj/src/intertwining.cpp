#include "isospec/intertwining.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace isospec::intertwining {

using core::adjoint;
using core::op_norm;

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Invertible: return "Invertible";
        case Regime::InvertibleCommuting: return "InvertibleCommuting";
        case Regime::NonInvertible: return "NonInvertible";
    }
    return "Unknown";
}

Regime regime_from_string(std::string_view s) {
    if (s == "Invertible") return Regime::Invertible;
    if (s == "InvertibleCommuting") return Regime::InvertibleCommuting;
    if (s == "NonInvertible") return Regime::NonInvertible;
    throw ParseError("unknown regime tag '" + std::string(s) + "'");
}

namespace {

void check_shapes(const Matrix& theta1, const Matrix& x) {
    if (theta1.rows() != theta1.cols() || theta1.rows() == 0) {
        throw DimensionError("Theta1 must be square and nonempty");
    }
    if (x.rows() != theta1.rows() || x.cols() == 0) {
        std::ostringstream os;
        os << "X must be " << theta1.rows() << " x d2 to act as X: H2 -> H1, got " << x.rows()
           << "x" << x.cols();
        throw DimensionError(os.str());
    }
}

bool x_invertible(const Matrix& x, double tol) {
    if (x.rows() != x.cols()) return false;
    Eigen::JacobiSVD<Matrix> svd(x);
    const RealVector& s = svd.singularValues();
    return s(0) > 0.0 && s(s.size() - 1) > tol * s(0);
}

// [N1, Theta1] = 0 relative to |N1| |Theta1|.
bool n1_commutes(const Matrix& n1, const Matrix& theta1, double tol) {
    const double scale = op_norm(n1) * op_norm(theta1);
    return op_norm(core::commutator(n1, theta1)) <= tol * scale;
}

bool n2_positive(const Matrix& n2, double tol) {
    const double scale = op_norm(n2);
    if (scale == 0.0) return false;
    return core::is_strictly_positive(n2 / scale, tol);
}

}  // namespace

Regime classify(const Matrix& theta1, const Matrix& x, double tol) {
    check_shapes(theta1, x);
    const Matrix n1 = x * x.adjoint();
    if (x_invertible(x, tol)) {
        return n1_commutes(n1, theta1, tol) ? Regime::InvertibleCommuting : Regime::Invertible;
    }
    if (x.rows() == x.cols()) {
        throw RegimeError(
            "X is square but not invertible: in finite dimension det(X^dagger X) = |det X|^2 = 0, "
            "so N2 = X^dagger X cannot be strictly positive (no square singular intertwiner)");
    }
    const Matrix n2 = x.adjoint() * x;
    if (!n2_positive(n2, tol)) {
        throw RegimeError("X is not invertible and N2 = X^dagger X is not strictly positive");
    }
    if (!n1_commutes(n1, theta1, tol)) {
        throw RegimeError("X is not invertible and [N1, Theta1] != 0 with N1 = X X^dagger");
    }
    return Regime::NonInvertible;
}

Matrix build_case1(const Matrix& theta1, const Matrix& x) {
    check_shapes(theta1, x);
    if (x.rows() != x.cols()) throw SingularityError("build_case1: X is not square");
    Eigen::FullPivLU<Matrix> lu(x);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) throw SingularityError("build_case1: X is singular");
    return lu.solve(theta1 * x);
}

Matrix case1_eigenvectors(const Matrix& x, const Matrix& phi1) {
    Eigen::FullPivLU<Matrix> lu(x);
    lu.setThreshold(1e-13);
    if (x.rows() != x.cols() || !lu.isInvertible()) {
        throw SingularityError("case1_eigenvectors: X is singular");
    }
    return lu.solve(phi1);
}

Matrix build_case3(const Matrix& theta1, const Matrix& x, double tol) {
    check_shapes(theta1, x);
    const Matrix n1 = x * x.adjoint();
    const Matrix n2 = x.adjoint() * x;
    if (!n2_positive(n2, tol)) {
        throw RegimeError("build_case3: precondition N2 = X^dagger X > 0 violated");
    }
    if (!n1_commutes(n1, theta1, tol)) {
        throw RegimeError("build_case3: precondition [N1, Theta1] = 0 violated");
    }
    Eigen::LLT<Matrix> llt(n2);
    if (llt.info() != Eigen::Success) {
        throw RegimeError("build_case3: Cholesky factorization of N2 failed");
    }
    return llt.solve(x.adjoint() * theta1 * x);
}

bool MappedFamily::in_kernel(std::size_t n) const {
    return std::find(kernel_set.begin(), kernel_set.end(), n) != kernel_set.end();
}

bool MappedFamily::tilde_k_simple() const {
    return std::all_of(degeneracy_classes.begin(), degeneracy_classes.end(),
                       [](const auto& c) { return c.size() == 1; });
}

namespace {

std::vector<std::vector<std::size_t>> group_degenerate(const RealVector& tilde_k,
                                                       const std::vector<std::size_t>& kernel,
                                                       double tol) {
    std::vector<std::size_t> live;
    for (Eigen::Index n = 0; n < tilde_k.size(); ++n) {
        const auto idx = static_cast<std::size_t>(n);
        if (std::find(kernel.begin(), kernel.end(), idx) == kernel.end()) live.push_back(idx);
    }
    std::stable_sort(live.begin(), live.end(), [&](std::size_t a, std::size_t b) {
        return tilde_k(static_cast<Eigen::Index>(a)) < tilde_k(static_cast<Eigen::Index>(b));
    });
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t n : live) {
        const double k = tilde_k(static_cast<Eigen::Index>(n));
        if (!classes.empty()) {
            const double k0 = tilde_k(static_cast<Eigen::Index>(classes.back().front()));
            if (std::abs(k - k0) <= tol * std::max(1.0, std::abs(k0))) {
                classes.back().push_back(n);
                continue;
            }
        }
        classes.push_back({n});
    }
    for (auto& c : classes) std::sort(c.begin(), c.end());
    return classes;
}

}  // namespace

MappedFamily map_eigensystem(const Matrix& x, const core::Eigensystem& es, const Tolerances& tol) {
    if (!es.simple_spectrum) {
        throw SpectrumError("map_eigensystem: Theta1 eigenvalues are not simple");
    }
    if (es.vectors.rows() != x.rows()) {
        throw DimensionError("map_eigensystem: eigenvectors do not live in the range space of X");
    }
    const Matrix n1 = x * x.adjoint();
    const Matrix n2 = x.adjoint() * x;
    const double xnorm = op_norm(x);

    MappedFamily out;
    out.phi2 = x.adjoint() * es.vectors;
    const Eigen::Index count = es.vectors.cols();
    out.tilde_k = RealVector::Zero(count);
    out.n1_residual = RealVector::Zero(count);
    out.n2_residual = RealVector::Zero(count);
    for (Eigen::Index n = 0; n < count; ++n) {
        const double norm1 = es.vectors.col(n).norm();
        const double norm2 = out.phi2.col(n).norm();
        if (norm2 <= tol.kernel * xnorm * norm1) {
            out.kernel_set.push_back(static_cast<std::size_t>(n));
            out.phi2.col(n).setZero();
            out.n1_residual(n) = (n1 * es.vectors.col(n)).norm();
            continue;
        }
        const double k = (norm2 / norm1) * (norm2 / norm1);
        out.tilde_k(n) = k;
        out.n1_residual(n) = (n1 * es.vectors.col(n) - k * es.vectors.col(n)).norm();
        out.n2_residual(n) = (n2 * out.phi2.col(n) - k * out.phi2.col(n)).norm();
    }
    out.degeneracy_classes = group_degenerate(out.tilde_k, out.kernel_set, tol.degeneracy);
    return out;
}

InverseMap inverse_map(const Matrix& x, const Matrix& phi2, const RealVector& tilde_k,
                       const std::optional<Matrix>& original_phi1) {
    if (phi2.rows() != x.cols() || tilde_k.size() != phi2.cols()) {
        throw DimensionError("inverse_map: shapes of X, phi2 and k-tilde disagree");
    }
    InverseMap out;
    out.phi1 = x * phi2;
    for (Eigen::Index n = 0; n < tilde_k.size(); ++n) {
        if (!(tilde_k(n) > 0.0)) {
            std::ostringstream os;
            os << "inverse_map: k-tilde[" << n << "] = " << tilde_k(n)
               << " is not positive (vector lies in ker X^dagger)";
            throw KernelError(os.str());
        }
        out.phi1.col(n) /= tilde_k(n);
    }
    if (original_phi1) {
        if (original_phi1->rows() != out.phi1.rows() || original_phi1->cols() != out.phi1.cols()) {
            throw DimensionError("inverse_map: original family has the wrong shape");
        }
        out.residual = (out.phi1 - *original_phi1).colwise().norm().transpose();
    }
    return out;
}

bool IntertwiningModel::in_kernel(std::size_t n) const {
    return std::find(kernel_set.begin(), kernel_set.end(), n) != kernel_set.end();
}

core::BiorthogonalSystem IntertwiningModel::level1() const {
    core::BiorthogonalSystem sys;
    sys.phi = eigen1.vectors;
    sys.psi = psi1;
    sys.values = eigen1.values;
    sys.pairing = RealVector::Ones(eigen1.vectors.cols());
    return sys;
}

core::BiorthogonalSystem IntertwiningModel::level2() const {
    core::BiorthogonalSystem sys;
    sys.phi = phi2;
    sys.psi = psi2;
    sys.values = eigen1.values;
    sys.pairing = tilde_k;
    return sys;
}

RealVector IntertwiningModel::case2_constants() const {
    RealVector k = RealVector::Zero(tilde_k.size());
    for (Eigen::Index n = 0; n < tilde_k.size(); ++n) {
        if (tilde_k(n) > 0.0) k(n) = 1.0 / tilde_k(n);
    }
    return k;
}

IntertwiningModel assemble_model(const Matrix& theta1, const Matrix& x, const Matrix& theta2,
                                 Regime regime, const core::Eigensystem& eigen1,
                                 const Tolerances& tol) {
    check_shapes(theta1, x);
    if (theta2.rows() != x.cols() || theta2.cols() != x.cols()) {
        throw DimensionError("Theta2 must be d2 x d2 with d2 = cols(X)");
    }
    IntertwiningModel m;
    m.theta1 = theta1;
    m.x = x;
    m.theta2 = theta2;
    m.n1 = x * x.adjoint();
    m.n2 = x.adjoint() * x;
    m.regime = regime;
    m.eigen1 = eigen1;
    m.psi1 = core::biorthogonal_partner(eigen1.vectors);

    if (regime == Regime::Invertible) {
        // Without [N1, Theta1] = 0 only X^{-1} phi1 are eigenvectors of Theta2;
        // X^dagger psi1 remain eigenvectors of Theta2^dagger with pairing 1.
        m.phi2 = case1_eigenvectors(x, eigen1.vectors);
        m.psi2 = x.adjoint() * m.psi1;
        m.tilde_k = RealVector::Ones(eigen1.vectors.cols());
        m.degeneracy_classes = group_degenerate(m.tilde_k, {}, tol.degeneracy);
        return m;
    }

    MappedFamily mapped = map_eigensystem(x, eigen1, tol);
    m.phi2 = std::move(mapped.phi2);
    m.psi2 = x.adjoint() * m.psi1;
    for (std::size_t n : mapped.kernel_set) m.psi2.col(static_cast<Eigen::Index>(n)).setZero();
    m.kernel_set = std::move(mapped.kernel_set);
    m.tilde_k = std::move(mapped.tilde_k);
    m.degeneracy_classes = std::move(mapped.degeneracy_classes);
    return m;
}

IntertwiningModel build_model(const Matrix& theta1, const Matrix& x, const Tolerances& tol,
                              const std::optional<core::Eigensystem>& supplied) {
    const Regime regime = classify(theta1, x, tol.relation);
    const Matrix theta2 =
        regime == Regime::NonInvertible ? build_case3(theta1, x, tol.relation) : build_case1(theta1, x);
    core::Eigensystem es = supplied ? *supplied : core::eig(theta1, tol.multiplicity);
    if (!es.simple_spectrum) {
        throw SpectrumError("build_model: Theta1 must have a simple spectrum");
    }
    return assemble_model(theta1, x, theta2, regime, es, tol);
}

namespace {

Matrix corner(const Matrix& m, const std::optional<std::size_t>& block) {
    if (!block) return m;
    const auto b = static_cast<Eigen::Index>(*block);
    return m.topLeftCorner(std::min(b, m.rows()), std::min(b, m.cols()));
}

Matrix matrix_power(const Matrix& m, int n) {
    Matrix out = Matrix::Identity(m.rows(), m.cols());
    for (int i = 0; i < n; ++i) out = out * m;
    return out;
}

// Greedy nearest matching of `found` against `allowed`; returns the largest
// mismatch, or +inf when the counts differ.
double spectrum_mismatch(const Vector& found, const std::vector<Complex>& allowed) {
    if (static_cast<std::size_t>(found.size()) != allowed.size()) {
        return std::numeric_limits<double>::infinity();
    }
    std::vector<bool> used(allowed.size(), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < found.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < allowed.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(found(i) - allowed[j]);
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        used[best_j] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

RelationReport verify_relations(const IntertwiningModel& model, const VerifyOptions& opts) {
    RelationReport rep;
    const double tol = opts.tolerance;
    const Matrix& t1 = model.theta1;
    const Matrix& t2 = model.theta2;
    const Matrix& x = model.x;
    const Matrix xd = x.adjoint();
    const double nt1 = op_norm(t1);
    const double nt2 = op_norm(t2);
    const double nx = op_norm(x);
    const bool commuting = model.regime != Regime::Invertible;
    const auto& blk = opts.block;

    rep.add("intertwine.X_theta2", op_norm(corner(x * t2 - t1 * x, blk)), nx * (nt1 + nt2), tol);
    for (int p = 2; p <= 4; ++p) {
        const Matrix r = x * matrix_power(t2, p) - matrix_power(t1, p) * x;
        rep.add("intertwine.power" + std::to_string(p), op_norm(corner(r, blk)),
                nx * (std::pow(nt1, p) + std::pow(nt2, p)), tol);
    }
    if (commuting) {
        rep.add("intertwine.theta2_Xdag", op_norm(corner(t2 * xd - xd * t1, blk)), nx * (nt1 + nt2), tol);
        rep.add("intertwine.X_theta2dag",
                op_norm(corner(x * t2.adjoint() - t1.adjoint() * x, blk)), nx * (nt1 + nt2), tol);
        rep.add("commute.N2_theta2", op_norm(corner(core::commutator(model.n2, t2), blk)),
                2.0 * op_norm(model.n2) * nt2, tol);
    } else {
        rep.add_not_applicable("intertwine.theta2_Xdag", "requires [N1, Theta1] = 0");
        rep.add_not_applicable("intertwine.X_theta2dag", "requires [N1, Theta1] = 0");
        rep.add_not_applicable("commute.N2_theta2", "requires [N1, Theta1] = 0");
    }
    rep.add("intertwine.X_N2", op_norm(corner(x * model.n2 - model.n1 * x, blk)), 2.0 * nx * nx * nx, tol);

    // Eigen-relations on both levels.
    const Matrix& phi1 = model.eigen1.vectors;
    const Vector& eps = model.eigen1.values;
    double r_phi1 = 0.0, r_psi1 = 0.0, r_phi2 = 0.0, r_psi2 = 0.0, r_n1 = 0.0, r_n2 = 0.0;
    double kernel_leak = 0.0;
    for (Eigen::Index n = 0; n < phi1.cols(); ++n) {
        const auto idx = static_cast<std::size_t>(n);
        const double e_scale = std::max(1.0, std::abs(eps(n)));
        r_phi1 = std::max(r_phi1, (t1 * phi1.col(n) - eps(n) * phi1.col(n)).norm() /
                                      (phi1.col(n).norm() * e_scale));
        r_psi1 = std::max(r_psi1, (t1.adjoint() * model.psi1.col(n) - std::conj(eps(n)) * model.psi1.col(n)).norm() /
                                      (model.psi1.col(n).norm() * e_scale));
        if (model.in_kernel(idx)) {
            kernel_leak = std::max(kernel_leak, (xd * phi1.col(n)).norm() / phi1.col(n).norm());
            continue;
        }
        const double p2 = model.phi2.col(n).norm();
        const double q2 = model.psi2.col(n).norm();
        r_phi2 = std::max(r_phi2, (t2 * model.phi2.col(n) - eps(n) * model.phi2.col(n)).norm() / (p2 * e_scale));
        if (commuting) {
            r_psi2 = std::max(r_psi2,
                              (t2.adjoint() * model.psi2.col(n) - std::conj(eps(n)) * model.psi2.col(n)).norm() /
                                  (q2 * e_scale));
            const double k = model.tilde_k(n);
            r_n1 = std::max(r_n1, (model.n1 * phi1.col(n) - k * phi1.col(n)).norm() /
                                      (phi1.col(n).norm() * std::max(1.0, k)));
            r_n2 = std::max(r_n2, (model.n2 * model.phi2.col(n) - k * model.phi2.col(n)).norm() /
                                      (p2 * std::max(1.0, k)));
        }
    }
    rep.add("eigen.theta1_phi1", r_phi1, 1.0, tol, "relative to |phi| max(1,|eps|)");
    rep.add("eigen.theta1dag_psi1", r_psi1, 1.0, tol, "relative to |psi| max(1,|eps|)");
    rep.add("eigen.theta2_phi2", r_phi2, 1.0, tol, "non-kernel indices");
    if (commuting) {
        rep.add("eigen.theta2dag_psi2", r_psi2, 1.0, tol, "non-kernel indices");
        rep.add("eigen.N1_phi1", r_n1, 1.0, tol);
        rep.add("eigen.N2_phi2", r_n2, 1.0, tol);
        rep.add("kernel.phi2_vanishes", kernel_leak, nx, tol, "X^dagger phi1_n for n in the kernel set");
    } else {
        rep.add_not_applicable("eigen.theta2dag_psi2", "Invertible regime uses X^{-1} phi1");
        rep.add_not_applicable("eigen.N1_phi1", "requires [N1, Theta1] = 0");
        rep.add_not_applicable("eigen.N2_phi2", "requires [N1, Theta1] = 0");
        rep.add_not_applicable("kernel.phi2_vanishes", "kernel set is empty for invertible X");
    }

    // Pairing <phi2_k, psi2_n> = k-tilde_n delta_kn over non-kernel indices.
    double pair_err = 0.0, k_consistency = 0.0, k_scale = 1.0;
    std::size_t nonpositive = 0;
    const Matrix gram = model.phi2.adjoint() * model.psi2;
    for (Eigen::Index k = 0; k < gram.rows(); ++k) {
        if (model.in_kernel(static_cast<std::size_t>(k))) continue;
        k_scale = std::max(k_scale, model.tilde_k(k));
        if (!(model.tilde_k(k) > 0.0)) ++nonpositive;
        k_consistency = std::max(k_consistency, std::abs(gram(k, k) - model.tilde_k(k)));
        for (Eigen::Index n = 0; n < gram.cols(); ++n) {
            if (model.in_kernel(static_cast<std::size_t>(n))) continue;
            const Complex expected = k == n ? Complex(model.tilde_k(n), 0.0) : Complex(0.0, 0.0);
            pair_err = std::max(pair_err, std::abs(gram(k, n) - expected));
        }
    }
    rep.add("pairing.level2", pair_err, k_scale, tol, "max |<phi2_k, psi2_n> - k_n delta_kn|");
    rep.add("tilde_k.positive", static_cast<double>(nonpositive), 1.0, 0.0,
            "count of non-kernel indices with k-tilde <= 0");
    rep.add("tilde_k.pairing_consistency", k_consistency, k_scale, tol);
    rep.add("pairing.level1", (phi1.adjoint() * model.psi1 - Matrix::Identity(phi1.cols(), phi1.cols()))
                                  .cwiseAbs()
                                  .maxCoeff(),
            1.0, tol);

    // Spectrum of Theta2 equals {eps_n : n not in the kernel set}.
    if (!blk) {
        const Vector found = core::eig(t2, 0.0).values;
        std::vector<Complex> allowed;
        for (Eigen::Index n = 0; n < eps.size(); ++n) {
            if (!model.in_kernel(static_cast<std::size_t>(n))) allowed.push_back(eps(n));
        }
        if (model.regime == Regime::Invertible) {
            allowed.assign(eps.data(), eps.data() + eps.size());
        }
        rep.add("spectrum.inclusion", spectrum_mismatch(found, allowed), std::max(1.0, nt1),
                opts.spectrum_tolerance);
    } else {
        rep.add_not_applicable("spectrum.inclusion", "skipped when residuals are restricted to a block");
    }
    return rep;
}

RelationReport proposition1_check(const IntertwiningModel& model, double tol) {
    if (model.regime == Regime::Invertible) {
        throw RegimeError("proposition1_check: requires [N1, Theta1] = 0 and N2 > 0");
    }
    RelationReport rep;
    const Matrix& t1 = model.theta1;
    const Matrix& t2 = model.theta2;
    const double nt1 = op_norm(t1), nt2 = op_norm(t2);

    rep.add("prop1.i.N2_theta2_commute", op_norm(core::commutator(model.n2, t2)),
            2.0 * op_norm(model.n2) * nt2, tol);

    const double sa1 = op_norm(t1 - t1.adjoint());
    const double sa2 = op_norm(t2 - t2.adjoint());
    if (sa1 <= tol * std::max(1.0, nt1)) {
        rep.add("prop1.ii.theta2_self_adjoint", sa2, nt2, tol * 10.0, "Theta1 self-adjoint");
    } else {
        rep.add_not_applicable("prop1.ii.theta2_self_adjoint", "Theta1 is not self-adjoint");
    }

    const bool n1_positive = n2_positive(model.n1, tol);
    if (n1_positive && sa2 <= tol * std::max(1.0, nt2)) {
        rep.add("prop1.iii.theta1_self_adjoint", sa1, nt1, tol * 10.0, "Theta2 self-adjoint and N1 > 0");
    } else if (!n1_positive) {
        rep.add_not_applicable("prop1.iii.theta1_self_adjoint", "N1 is not strictly positive");
    } else {
        rep.add_not_applicable("prop1.iii.theta1_self_adjoint", "Theta2 is not self-adjoint");
    }

    if (n1_positive) {
        const Matrix n1_inv = model.n1.inverse();
        const Matrix n2_inv = model.n2.inverse();
        const double nx = op_norm(model.x);
        rep.add("n1_invertible.X_N2inv", op_norm(model.x * n2_inv - n1_inv * model.x),
                nx * (op_norm(n1_inv) + op_norm(n2_inv)), tol);
        rep.add("n1_invertible.theta1_from_theta2",
                op_norm(t1 - n1_inv * (model.x * t2 * model.x.adjoint())), std::max(nt1, 1.0), tol);
    } else {
        rep.add_not_applicable("n1_invertible.X_N2inv", "N1 is not invertible");
        rep.add_not_applicable("n1_invertible.theta1_from_theta2", "N1 is not invertible");
    }
    return rep;
}

AdjointDescent adjoint_descent(const IntertwiningModel& model) {
    if (model.regime == Regime::Invertible) {
        throw RegimeError("adjoint_descent: requires [N1, Theta1] = 0 and N2 > 0");
    }
    Eigen::LLT<Matrix> llt(model.n2);
    if (llt.info() != Eigen::Success) throw RegimeError("adjoint_descent: N2 is not positive");
    AdjointDescent out;
    out.descended = llt.solve(model.x.adjoint() * model.theta1.adjoint() * model.x);
    out.theta2_adjoint = model.theta2.adjoint();
    out.difference = op_norm(out.descended - out.theta2_adjoint);
    return out;
}

namespace {

Matrix random_complex(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            const double re = g(rng);
            const double im = g(rng);
            m(i, j) = Complex(re, im);
        }
    }
    return m;
}

Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_complex(n, n, rng));
    return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace

CommutingPair make_commuting_pair(std::size_t dim1, std::size_t dim2, std::uint64_t seed,
                                  const PairOptions& opts) {
    if (dim2 < 1 || dim1 <= dim2) {
        std::ostringstream os;
        os << "make_commuting_pair: need dim1 > dim2 >= 1, got (" << dim1 << ", " << dim2 << ")";
        if (dim1 == dim2) {
            os << "; a square singular X cannot have N2 = X^dagger X > 0";
        }
        throw DimensionError(os.str());
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto d1 = static_cast<Eigen::Index>(dim1);
    const auto d2 = static_cast<Eigen::Index>(dim2);

    // Singular values in groups of 1..3 equal entries so that N1 has
    // degenerate positive eigenspaces (non-orthogonal phi1 inside them).
    std::vector<Eigen::Index> group_sizes;
    {
        Eigen::Index left = d2;
        while (left > 0) {
            const auto g = std::min<Eigen::Index>(left, 1 + static_cast<Eigen::Index>(unif(rng) * 3.0));
            group_sizes.push_back(g);
            left -= g;
        }
    }
    RealVector sigma(d2);
    {
        Eigen::Index pos = 0;
        for (std::size_t g = 0; g < group_sizes.size(); ++g) {
            const double s = 0.8 + 0.5 * static_cast<double>(g) + 0.2 * unif(rng);
            for (Eigen::Index i = 0; i < group_sizes[g]; ++i) sigma(pos++) = s;
        }
        group_sizes.push_back(d1 - d2);  // kernel of N1
    }

    const Matrix u = random_unitary(d1, rng);
    const Matrix v = random_unitary(d2, rng);
    Matrix core_x = Matrix::Zero(d1, d2);
    for (Eigen::Index i = 0; i < d2; ++i) core_x(i, i) = sigma(i);

    CommutingPair out;
    out.x = u * core_x * v.adjoint();

    for (int attempt = 0; attempt < 1000; ++attempt) {
        Matrix blocks = Matrix::Zero(d1, d1);
        Eigen::Index pos = 0;
        for (Eigen::Index g : group_sizes) {
            Matrix b = random_complex(g, g, rng);
            if (opts.hermitian_theta1) b = (0.5 * (b + b.adjoint())).eval();
            blocks.block(pos, pos, g, g) = b;
            pos += g;
        }
        const Vector values = Eigen::ComplexEigenSolver<Matrix>(blocks, false).eigenvalues();
        if (!core::has_simple_spectrum(values, opts.min_gap)) continue;
        out.theta1 = u * blocks * u.adjoint();
        if (opts.hermitian_theta1) out.theta1 = (0.5 * (out.theta1 + out.theta1.adjoint())).eval();
        return out;
    }
    throw NumericalError("make_commuting_pair: could not draw a simple spectrum");
}

}  // namespace isospec::intertwining
