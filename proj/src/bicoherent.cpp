#include "isospec/bicoherent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "isospec/errors.hpp"
#include "isospec/quadrature.hpp"

namespace isospec::coherent {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_ladder_sequence(const core::EpsilonSequence& eps, std::size_t n, const char* who) {
    if (!eps.strictly_increasing()) {
        throw ParameterError(std::string(who) + ": eps must satisfy 0 = eps_0 < eps_1 < ...");
    }
    if (eps.size() < n) {
        throw DimensionError(std::string(who) + ": eps has " + std::to_string(eps.size()) +
                             " terms, family has " + std::to_string(n));
    }
}

void require_unit_pairing(const core::BiorthogonalSystem& sys, const char* who) {
    for (Eigen::Index k = 0; k < sys.pairing.size(); ++k) {
        if (std::abs(sys.pairing(k) - 1.0) > 1e-12) {
            throw ParameterError(std::string(who) +
                                 ": level-1 construction needs unit pairing constants");
        }
    }
}

// log eps_k! for k = 0..n-1.
std::vector<double> log_factorials(const core::EpsilonSequence& eps, std::size_t n) {
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) out[k] = out[k - 1] + std::log(eps[k]);
    return out;
}

// Factor eps_K (= F_K / F_{K-1}) at the truncation point, extrapolated
// linearly when the sequence stops short.
double next_factor(const std::vector<double>& factors, std::size_t k) {
    if (k < factors.size()) return factors[k];
    const std::size_t n = factors.size();
    if (n >= 2) return std::max(factors[n - 1], 2.0 * factors[n - 1] - factors[n - 2]);
    return n == 1 ? factors[0] : 1.0;
}

struct StateInput {
    const Matrix* phi;
    const Matrix* psi;
    std::vector<std::size_t> columns;  // family columns in summation order
    std::vector<double> pairing;       // c_l, divides the squared coefficient
    std::vector<double> log_fact;      // log F_l
    std::vector<double> factors;       // F_l / F_{l-1}, may extend past the order
};

BicoherentState assemble_state(const StateInput& in, Complex z, std::size_t order) {
    BicoherentState st;
    st.z = z;
    st.order = order;
    const double r = std::abs(z);
    const double theta = std::arg(z);
    const double log_r = r > 0.0 ? std::log(r) : -kInfinity;

    // u_l = |z|^l / sqrt(F_l) as logs, then normalization over the same terms.
    std::vector<double> log_u(order);
    double max_log = -kInfinity;
    for (std::size_t l = 0; l < order; ++l) {
        log_u[l] = (l == 0 ? 0.0 : static_cast<double>(l) * log_r) - 0.5 * in.log_fact[l];
        max_log = std::max(max_log, 2.0 * log_u[l]);
    }
    double sum = 0.0;
    for (std::size_t l = 0; l < order; ++l) sum += std::exp(2.0 * log_u[l] - max_log);
    const double log_norm = -0.5 * (max_log + std::log(sum));
    st.normalization = std::exp(log_norm);

    const auto dim = in.phi->rows();
    st.coefficients = Vector::Zero(static_cast<Eigen::Index>(order));
    st.phi = Vector::Zero(dim);
    st.psi = Vector::Zero(dim);
    for (std::size_t l = 0; l < order; ++l) {
        const double mag = std::exp(log_norm + log_u[l]) / std::sqrt(in.pairing[l]);
        const Complex c = std::polar(mag, static_cast<double>(l) * theta);
        st.coefficients(static_cast<Eigen::Index>(l)) = c;
        const auto col = static_cast<Eigen::Index>(in.columns[l]);
        st.phi += c * in.phi->col(col);
        st.psi += c * in.psi->col(col);
    }

    const std::size_t last = order - 1;
    const auto last_col = static_cast<Eigen::Index>(in.columns[last]);
    const double vec_norm = std::max(in.phi->col(last_col).norm(), in.psi->col(last_col).norm());
    st.tail_bound = r * std::abs(st.coefficients(static_cast<Eigen::Index>(last))) * vec_norm;

    const double eps_next = next_factor(in.factors, order);
    st.last_ratio = eps_next > 0.0 ? r * r / eps_next : kInfinity;
    if (st.last_ratio < 1.0) {
        const double first_omitted =
            std::exp(2.0 * (log_norm + log_u[last])) * st.last_ratio;
        st.normalization_tail = first_omitted / (1.0 - st.last_ratio);
    } else {
        st.normalization_tail = kInfinity;
    }
    st.converged = st.last_ratio <= 0.9;
    if (!core::all_finite(st.phi) || !core::all_finite(st.psi)) {
        throw NumericalError("coherent state: non-finite coefficients");
    }
    return st;
}

void check_order(std::size_t order, std::size_t available, const char* who) {
    if (order == 0) throw DimensionError(std::string(who) + ": order must be positive");
    if (order > available) {
        throw DimensionError(std::string(who) + ": order " + std::to_string(order) +
                             " exceeds the " + std::to_string(available) + " available vectors");
    }
}

void check_radius(Complex z, double rho, const char* who) {
    if (!(std::abs(z) < rho)) {
        throw DivergenceError(std::string(who) + ": |z| = " + std::to_string(std::abs(z)) +
                              " is outside the convergence disk of radius " + std::to_string(rho));
    }
}

}  // namespace

LadderPair build_ladders(const core::BiorthogonalSystem& sys, const core::EpsilonSequence& eps) {
    const std::size_t n = sys.size();
    require_ladder_sequence(eps, n, "build_ladders");
    require_unit_pairing(sys, "build_ladders");
    const auto dim = static_cast<Eigen::Index>(sys.dim());
    LadderPair out{Matrix::Zero(dim, dim), Matrix::Zero(dim, dim), 1};
    for (std::size_t k = 1; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double s = std::sqrt(eps[k]);
        out.lowering += s * sys.phi.col(i - 1) * sys.psi.col(i).adjoint();
        out.raising += s * sys.phi.col(i) * sys.psi.col(i - 1).adjoint();
    }
    return out;
}

LadderPair build_ladders_level2(const core::BiorthogonalSystem& sys2, const core::EpsilonSequence& eps,
                                const RealVector& tilde_k) {
    const std::size_t n = sys2.size();
    require_ladder_sequence(eps, n, "build_ladders_level2");
    if (static_cast<std::size_t>(tilde_k.size()) < n) {
        throw DimensionError("build_ladders_level2: too few pairing constants");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!(tilde_k(static_cast<Eigen::Index>(k)) > 0.0)) {
            throw KernelError("build_ladders_level2: pairing constant " + std::to_string(k) +
                              " vanishes; filter the kernel set first");
        }
    }
    const auto dim = static_cast<Eigen::Index>(sys2.dim());
    LadderPair out{Matrix::Zero(dim, dim), Matrix::Zero(dim, dim), 2};
    for (std::size_t k = 1; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double kk = tilde_k(i);
        const double km = tilde_k(i - 1);
        // <psi_k, . > / k_k picks out the phi_k coefficient.
        out.lowering += (std::sqrt(eps[k] * kk / km) / kk) * sys2.phi.col(i - 1) * sys2.psi.col(i).adjoint();
        out.raising += (std::sqrt(eps[k] * km / kk) / km) * sys2.phi.col(i) * sys2.psi.col(i - 1).adjoint();
    }
    return out;
}

GrowthFit fit_norm_growth(const Matrix& family, const core::EpsilonSequence& eps, const GrowthGrid& grid) {
    const std::size_t n = static_cast<std::size_t>(family.cols());
    if (n == 0) throw DimensionError("fit_norm_growth: empty family");
    if (eps.size() < n) throw DimensionError("fit_norm_growth: eps shorter than the family");
    if (family.col(0).norm() > 1.0 + 1e-12) {
        throw GrowthError("fit_norm_growth: |v_0| > 1 cannot satisfy |v_0| <= r^0");
    }
    const auto logf = log_factorials(eps, n);
    std::vector<double> log_norm(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = family.col(static_cast<Eigen::Index>(k)).norm();
        log_norm[k] = v > 0.0 ? std::log(v) : -kInfinity;
    }

    const int steps = static_cast<int>(std::lround(0.5 / grid.alpha_step));
    for (int s = 0; s <= steps; ++s) {
        const double alpha = std::min(0.5, s * grid.alpha_step);
        std::vector<double> q;
        for (std::size_t k = 1; k < n; ++k) {
            q.push_back(std::exp((log_norm[k] - alpha * logf[k]) / static_cast<double>(k)));
        }
        double r = grid.r_floor;
        for (double v : q) r = std::max(r, v);
        const std::size_t window = std::min(grid.tail, q.size() / 2);
        bool accept = true;
        if (window > 0) {
            const double tail_max = *std::max_element(q.end() - static_cast<long>(window), q.end());
            const double head_max = *std::max_element(q.begin(), q.end() - static_cast<long>(window));
            accept = tail_max <= (1.0 + 1e-9) * head_max;
        }
        if (accept) return {r, alpha};
    }
    throw GrowthError("fit_norm_growth: norms grow faster than r^n (eps_n!)^(1/2)");
}

double estimate_limit(const std::vector<double>& seq, std::size_t tail) {
    if (seq.empty()) throw DimensionError("estimate_limit: empty sequence");
    const std::size_t k = std::min(tail, seq.size());
    const double last = seq.back();
    if (k < 3) return last;
    std::vector<double> d;
    for (std::size_t i = seq.size() - k; i + 1 < seq.size(); ++i) d.push_back(seq[i + 1] - seq[i]);
    const double scale = std::max(1.0, std::abs(last));
    if (std::all_of(d.begin(), d.end(), [&](double x) { return std::abs(x) <= 1e-12 * scale; })) {
        return last;
    }
    const bool up = std::all_of(d.begin(), d.end(), [](double x) { return x > 0.0; });
    const bool down = std::all_of(d.begin(), d.end(), [](double x) { return x < 0.0; });
    if (!up && !down) return last;
    double q = 0.0;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) q = std::max(q, d[i + 1] / d[i]);
    if (q >= 0.9) return up ? kInfinity : last;
    return last + d.back() * q / (1.0 - q);
}

ConvergenceData radius(const GrowthFit& phi, const GrowthFit& psi, const core::EpsilonSequence& eps,
                       std::size_t tail) {
    if (!eps.strictly_increasing()) {
        throw ParameterError("radius: eps must satisfy 0 = eps_0 < eps_1 < ...");
    }
    if (eps.size() < 2) throw DimensionError("radius: need at least two eps terms");
    std::vector<double> shifted(eps.values().begin() + 1, eps.values().end());
    ConvergenceData out;
    out.r_phi = phi.r;
    out.r_psi = psi.r;
    out.alpha_phi = phi.alpha;
    out.alpha_psi = psi.alpha;
    out.rho_hat = estimate_limit(shifted, tail);
    auto one = [&](const GrowthFit& g) {
        const double expo = 0.5 - g.alpha;
        if (expo <= 1e-15) return 1.0 / g.r;
        return std::pow(out.rho_hat, expo) / g.r;
    };
    out.rho_phi = one(phi);
    out.rho_psi = one(psi);
    out.rho = std::min({out.rho_phi, out.rho_psi, std::sqrt(out.rho_hat)});
    return out;
}

BicoherentState coherent_pair(const core::BiorthogonalSystem& sys, const core::EpsilonSequence& eps,
                              Complex z, std::size_t order, double rho) {
    check_order(order, sys.size(), "coherent_pair");
    require_ladder_sequence(eps, order, "coherent_pair");
    require_unit_pairing(sys, "coherent_pair");
    check_radius(z, rho, "coherent_pair");
    StateInput in{&sys.phi, &sys.psi, {}, {}, log_factorials(eps, order), eps.values()};
    for (std::size_t k = 0; k < order; ++k) {
        in.columns.push_back(k);
        in.pairing.push_back(1.0);
    }
    return assemble_state(in, z, order);
}

BicoherentState coherent_pair_level2(const core::BiorthogonalSystem& sys2,
                                     const core::EpsilonSequence& eps, const RealVector& tilde_k,
                                     Complex z, std::size_t order, double rho) {
    check_order(order, sys2.size(), "coherent_pair_level2");
    require_ladder_sequence(eps, order, "coherent_pair_level2");
    check_radius(z, rho, "coherent_pair_level2");
    if (static_cast<std::size_t>(tilde_k.size()) < order) {
        throw DimensionError("coherent_pair_level2: too few pairing constants");
    }
    StateInput in{&sys2.phi, &sys2.psi, {}, {}, log_factorials(eps, order), eps.values()};
    for (std::size_t k = 0; k < order; ++k) {
        const double c = tilde_k(static_cast<Eigen::Index>(k));
        if (!(c > 0.0)) {
            throw KernelError("coherent_pair_level2: pairing constant " + std::to_string(k) +
                              " vanishes; use filter_and_build");
        }
        in.columns.push_back(k);
        in.pairing.push_back(c);
    }
    return assemble_state(in, z, order);
}

FilteredState filter_and_build(const core::BiorthogonalSystem& sys2, const core::EpsilonSequence& eps,
                               const RealVector& tilde_k, const std::vector<std::size_t>& kernel_set,
                               Complex z, std::size_t order, TildeFactorial convention, double rho) {
    check_radius(z, rho, "filter_and_build");
    const std::size_t n = std::min<std::size_t>(sys2.size(), static_cast<std::size_t>(tilde_k.size()));
    FilteredState out;
    for (std::size_t k = 0; k < n; ++k) {
        if (std::find(kernel_set.begin(), kernel_set.end(), k) == kernel_set.end()) {
            out.survivors.push_back(k);
        }
    }
    if (out.survivors.empty()) throw DegenerateError("filter_and_build: every index is in the kernel set");
    check_order(order, out.survivors.size(), "filter_and_build");
    if (eps.size() <= out.survivors[order - 1]) {
        throw DimensionError("filter_and_build: eps too short for the surviving indices");
    }

    // Biorthogonality of the surviving family, before anything is built on it.
    const std::size_t m = out.survivors.size();
    out.tilde_k = RealVector(static_cast<Eigen::Index>(m));
    double kmax = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
        const double c = tilde_k(static_cast<Eigen::Index>(out.survivors[l]));
        if (!(c > 0.0)) {
            throw KernelError("filter_and_build: surviving index " + std::to_string(out.survivors[l]) +
                              " has a vanishing pairing constant");
        }
        out.tilde_k(static_cast<Eigen::Index>(l)) = c;
        kmax = std::max(kmax, c);
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            const Complex ip = sys2.phi.col(static_cast<Eigen::Index>(out.survivors[a]))
                                   .dot(sys2.psi.col(static_cast<Eigen::Index>(out.survivors[b])));
            const double want = a == b ? out.tilde_k(static_cast<Eigen::Index>(a)) : 0.0;
            out.biorthogonality_defect = std::max(out.biorthogonality_defect, std::abs(ip - want));
        }
    }
    if (out.biorthogonality_defect > 1e-8 * std::max(1.0, kmax)) {
        throw NumericalError("filter_and_build: surviving family is not biorthogonal (defect " +
                             std::to_string(out.biorthogonality_defect) + ")");
    }

    const auto full_logf = log_factorials(eps, eps.size());
    StateInput in{&sys2.phi, &sys2.psi, {}, {}, {}, {}};
    double prev = 0.0;
    for (std::size_t l = 0; l < m && out.survivors[l] < eps.size(); ++l) {
        const std::size_t idx = out.survivors[l];
        double lf = 0.0;
        if (convention == TildeFactorial::OriginalSequence) {
            lf = full_logf[idx];
        } else {
            lf = l == 0 ? 0.0 : prev + std::log(eps[idx]);
        }
        in.factors.push_back(l == 0 ? std::exp(lf) : std::exp(lf - prev));
        prev = lf;
        if (l < order) {
            in.columns.push_back(idx);
            in.pairing.push_back(out.tilde_k(static_cast<Eigen::Index>(l)));
            in.log_fact.push_back(lf);
        }
    }
    out.log_factorials = in.log_fact;
    out.state = assemble_state(in, z, order);
    return out;
}

double RadialMeasure::density(double r) const {
    if (r < 0.0) return 0.0;
    return c * std::pow(r, a) * std::exp(-b * std::pow(r, p));
}

double RadialMeasure::log_moment(std::size_t k) const {
    double max_log = -kInfinity;
    std::vector<double> logs(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        logs[i] = std::log(weights[i]) + 2.0 * static_cast<double>(k) * std::log(radii[i]);
        max_log = std::max(max_log, logs[i]);
    }
    double sum = 0.0;
    for (double l : logs) sum += std::exp(l - max_log);
    return max_log + std::log(sum);
}

double RadialMeasure::moment(std::size_t k) const { return std::exp(log_moment(k)); }

RadialMeasure RadialMeasure::scaled(double factor) const {
    if (!(factor > 0.0)) throw ParameterError("RadialMeasure::scaled: factor must be positive");
    RadialMeasure out = *this;
    out.c *= factor;
    for (double& w : out.weights) w *= factor;
    return out;
}

RadialMeasure solve_moment_measure(const core::EpsilonSequence& eps, std::size_t order, std::size_t nodes) {
    if (eps.size() < 2) throw DimensionError("solve_moment_measure: need eps_1");
    const double s = eps[1];
    if (!(s > 0.0) || eps[0] != 0.0) {
        throw NoClosedFormError("solve_moment_measure: eps is not of the form s k with s > 0");
    }
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const double want = s * static_cast<double>(k);
        if (std::abs(eps[k] - want) > 1e-12 * std::max(1.0, want)) {
            throw NoClosedFormError("solve_moment_measure: no closed-form measure for eps_" +
                                    std::to_string(k) + " = " + std::to_string(eps[k]) +
                                    " (only eps_k = s k is supported)");
        }
    }
    RadialMeasure m;
    m.c = 1.0 / (std::numbers::pi * s);
    m.a = 1.0;
    m.b = 1.0 / s;
    m.p = 2.0;
    m.slope = s;
    // t = r^2 / s turns the measure into exp(-t) dt / (2 pi).
    const auto rule = quadrature::gauss_laguerre(nodes);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        m.radii.push_back(std::sqrt(s * rule.nodes[i]));
        m.weights.push_back(rule.weights[i] / kTwoPi);
    }
    // eps_k! = s^k k!, checked in logs.
    for (std::size_t k = 0; k <= order; ++k) {
        const double log_target = static_cast<double>(k) * std::log(s) +
                                  std::lgamma(static_cast<double>(k) + 1.0) - std::log(kTwoPi);
        m.moment_residuals.push_back(std::abs(std::expm1(m.log_moment(k) - log_target)));
    }
    return m;
}

RadialMeasure solve_level2_measure(const core::EpsilonSequence& eps, const RealVector& tilde_k,
                                   std::size_t order, std::size_t nodes) {
    if (tilde_k.size() == 0) throw DimensionError("solve_level2_measure: no pairing constants");
    const std::size_t n = std::min<std::size_t>(order, static_cast<std::size_t>(tilde_k.size()));
    const double c = tilde_k(0);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = tilde_k(static_cast<Eigen::Index>(k));
        if (!(c > 0.0) || std::abs(v - c) > 1e-10 * c) {
            throw NoClosedFormError("solve_level2_measure: pairing constants are not constant");
        }
    }
    return solve_moment_measure(eps, order, nodes).scaled(c);
}

namespace {

void check_resolution_inputs(const core::BiorthogonalSystem& sys, const Vector& f, const Vector& g,
                             std::size_t order, const char* who) {
    check_order(order, sys.size(), who);
    if (static_cast<std::size_t>(f.size()) != sys.dim() || static_cast<std::size_t>(g.size()) != sys.dim()) {
        throw DimensionError(std::string(who) + ": test vectors do not match the family dimension");
    }
}

}  // namespace

ResolutionResult resolution_check(const core::BiorthogonalSystem& sys, const core::EpsilonSequence& eps,
                                  const RadialMeasure& measure, const Vector& f, const Vector& g,
                                  std::size_t order) {
    check_resolution_inputs(sys, f, g, order, "resolution_check");
    if (eps.size() < order) throw DimensionError("resolution_check: eps too short");
    const auto logf = log_factorials(eps, order);
    ResolutionResult out;
    out.lhs = 0.0;
    for (std::size_t k = 0; k < order; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double w = kTwoPi * std::exp(measure.log_moment(k) - logf[k]);
        out.lhs += f.dot(sys.phi.col(i)) * sys.psi.col(i).dot(g) * w;
    }
    out.identity_value = f.dot(g);
    out.rhs = out.identity_value;
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

ResolutionResult resolution_check_level2(const core::BiorthogonalSystem& sys2,
                                         const core::EpsilonSequence& eps, const RealVector& tilde_k,
                                         const RadialMeasure& measure, const Vector& f, const Vector& g,
                                         std::size_t order) {
    check_resolution_inputs(sys2, f, g, order, "resolution_check_level2");
    if (eps.size() < order || static_cast<std::size_t>(tilde_k.size()) < order) {
        throw DimensionError("resolution_check_level2: eps or pairing constants too short");
    }
    const auto logf = log_factorials(eps, order);
    ResolutionResult out;
    out.lhs = 0.0;
    out.rhs = 0.0;
    for (std::size_t k = 0; k < order; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double c = tilde_k(i);
        if (!(c > 0.0)) throw KernelError("resolution_check_level2: vanishing pairing constant");
        const Complex term = f.dot(sys2.phi.col(i)) * sys2.psi.col(i).dot(g);
        out.lhs += term * (kTwoPi * std::exp(measure.log_moment(k) - logf[k]) / c);
        out.rhs += term;
    }
    out.identity_value = f.dot(g);
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

ResolutionResult resolution_sum_form(const core::BiorthogonalSystem& sys, const Vector& f,
                                     const Vector& g, std::size_t order) {
    check_resolution_inputs(sys, f, g, order, "resolution_sum_form");
    ResolutionResult out;
    out.lhs = 0.0;
    for (std::size_t k = 0; k < order; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out.lhs += f.dot(sys.phi.col(i)) * sys.psi.col(i).dot(g) / sys.pairing(i);
    }
    out.identity_value = f.dot(g);
    out.rhs = out.identity_value;
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

Symbol symbol_from_string(std::string_view s) {
    if (s == "z") return Symbol::Z;
    if (s == "zbar") return Symbol::ZBar;
    throw ParameterError("unsupported symbol '" + std::string(s) + "' (expected z or zbar)");
}

std::string_view to_string(Symbol s) { return s == Symbol::Z ? "z" : "zbar"; }

QuantizedOperator quantize(Symbol symbol, const core::BiorthogonalSystem& sys,
                           const core::EpsilonSequence& eps, const RadialMeasure& measure,
                           std::size_t order) {
    check_order(order, sys.size(), "quantize");
    if (eps.size() < order) throw DimensionError("quantize: eps too short");
    require_unit_pairing(sys, "quantize");
    const auto logf = log_factorials(eps, order);
    const auto n = static_cast<Eigen::Index>(order);
    QuantizedOperator out;
    out.coefficients = Matrix::Zero(n, n);
    // Angular integration keeps only the k -> k+1 couplings.
    for (std::size_t k = 0; k + 1 < order; ++k) {
        const double v = kTwoPi * std::exp(measure.log_moment(k + 1) - 0.5 * (logf[k] + logf[k + 1]));
        const auto i = static_cast<Eigen::Index>(k);
        if (symbol == Symbol::Z) {
            out.coefficients(i, i + 1) = v;
        } else {
            out.coefficients(i + 1, i) = v;
        }
    }
    out.op = sys.phi.leftCols(n) * out.coefficients * sys.psi.leftCols(n).adjoint();
    return out;
}

Matrix coefficients_in(const core::BiorthogonalSystem& sys, const Matrix& op, std::size_t order) {
    check_order(order, sys.size(), "coefficients_in");
    const auto n = static_cast<Eigen::Index>(order);
    return sys.psi.leftCols(n).adjoint() * op * sys.phi.leftCols(n);
}

}  // namespace isospec::coherent
