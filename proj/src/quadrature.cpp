#include "isospec/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <utility>

#include "isospec/errors.hpp"

namespace isospec::quadrature {

namespace {

// L_n(x) and L_{n-1}(x) sharing a common factor exp(-log_scale).
struct Laguerre {
    double ln;
    double lnm1;
    double log_scale;
};

Laguerre laguerre(std::size_t n, double x) {
    double prev = 1.0;       // L_0
    double cur = 1.0 - x;    // L_1
    double log_scale = 0.0;
    if (n == 0) return {1.0, 0.0, 0.0};
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double next = ((2.0 * kk + 1.0 - x) * cur - kk * prev) / (kk + 1.0);
        prev = cur;
        cur = next;
        const double mag = std::abs(cur);
        if (mag > 1e150) {
            prev /= mag;
            cur /= mag;
            log_scale += std::log(mag);
        }
    }
    return {cur, prev, log_scale};
}

}  // namespace

Rule gauss_laguerre(std::size_t n) {
    if (n == 0) throw DimensionError("gauss_laguerre: need at least one node");
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::VectorXd diag(m);
    Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
    for (Eigen::Index i = 0; i < m; ++i) diag(i) = 2.0 * static_cast<double>(i) + 1.0;
    for (Eigen::Index i = 1; i < m; ++i) sub(i - 1) = static_cast<double>(i);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("gauss_laguerre: Jacobi matrix eigensolver failed");
    }

    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        for (int it = 0; it < 8; ++it) {
            const Laguerre l = laguerre(n, x);
            // x L_n'(x) = n (L_n - L_{n-1}), so the Newton step is scale free.
            const double denom = nn * (l.ln - l.lnm1);
            if (denom == 0.0) break;
            const double step = x * l.ln / denom;
            x -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, x)) break;
        }
        const Laguerre next = laguerre(n + 1, x);
        // w = x / ((n+1)^2 L_{n+1}(x)^2)
        const double log_w = std::log(x) - 2.0 * std::log(nn + 1.0) -
                             2.0 * (std::log(std::abs(next.ln)) + next.log_scale);
        rule.nodes[i] = x;
        rule.weights[i] = std::exp(log_w);
    }
    return rule;
}

}  // namespace isospec::quadrature
