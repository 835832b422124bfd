#include "isospec/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "isospec/bicoherent.hpp"
#include "isospec/errors.hpp"
#include "isospec/intertwining.hpp"
#include "isospec/matrix_io.hpp"
#include "isospec/model_json.hpp"
#include "isospec/model_zoo.hpp"

namespace isospec::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

constexpr const char* kCsvHeader = "# isospec-csv-v1";

struct RunConfig {
    std::string config_path;
    std::string model_path;
    std::string theta1_path;
    std::string x_path;
    std::string fixture;
    std::string params;
    std::string params_json;
    std::string random;
    std::string output{"model.json"};
    std::string output_dir{"."};
    std::string report;
    std::size_t order{0};  // 0: min(family size, default truncation)
    int level{1};
    double relation_tol{kDefaultRelationTol};
    double kernel_tol{kDefaultKernelTol};
    double overlap_tol{1e-9};
    std::size_t nodes{64};
    std::size_t radial{20};
    std::size_t angular{16};
    double max_radius{0.0};  // 0: automatic
    std::size_t pairs{16};
    std::string convention{"original"};
    std::string symbol{"z"};
    std::size_t block{0};  // 0: full operators
    bool hermitian{false};
    std::optional<std::uint64_t> seed;
};

struct InputError : Error {
    using Error::Error;
};

Json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

std::string fmt(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return io::format_double(x);
}

std::uint64_t resolve_seed(const RunConfig& cfg) {
    if (cfg.seed) return *cfg.seed;
    if (const char* env = std::getenv("ISOSPEC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw InputError(std::string("ISOSPEC_SEED is not an unsigned integer: ") + env);
        }
    }
    return 0;
}

// "1.5", "2i", "-i", "1+2i", "3e-2-4.5i"
Complex parse_complex(const std::string& text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    }
    auto real_of = [&](const std::string& t) -> double {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw InputError("cannot parse number '" + text + "'");
        }
        if (used != t.size()) throw InputError("cannot parse number '" + text + "'");
        return v;
    };
    if (s.empty()) throw InputError("empty parameter value");
    if (s.back() != 'i') return real_of(s);
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    const std::string re = split == std::string::npos ? "" : s.substr(0, split);
    std::string im = split == std::string::npos ? s : s.substr(split);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    return {re.empty() ? 0.0 : real_of(re), real_of(im)};
}

Json complex_json(Complex c) {
    if (c.imag() == 0.0) return c.real();
    return Json::array({c.real(), c.imag()});
}

// k=v,k=v with v a number, a complex "a+bi", or a ';'-separated list.
Json parse_params(const RunConfig& cfg) {
    Json out = Json::object();
    if (!cfg.params_json.empty()) {
        try {
            out = Json::parse(cfg.params_json);
        } catch (const Json::exception& e) {
            throw InputError(std::string("--params-json: ") + e.what());
        }
        if (!out.is_object()) throw InputError("--params-json must be a JSON object");
    }
    std::stringstream ss(cfg.params);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw InputError("--params entry '" + item + "' is not key=value");
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        if (val.find(';') != std::string::npos) {
            Json arr = Json::array();
            std::stringstream vs(val);
            std::string v;
            while (std::getline(vs, v, ';')) {
                if (!v.empty()) arr.push_back(complex_json(parse_complex(v)));
            }
            out[key] = arr;
        } else {
            out[key] = complex_json(parse_complex(val));
        }
    }
    return out;
}

intertwining::Tolerances tolerances(const RunConfig& cfg) {
    if (!(cfg.relation_tol > 0.0) || !(cfg.kernel_tol > 0.0) || !(cfg.overlap_tol > 0.0)) {
        throw InputError("tolerances must be positive");
    }
    intertwining::Tolerances tol;
    tol.relation = cfg.relation_tol;
    tol.kernel = cfg.kernel_tol;
    return tol;
}

intertwining::VerifyOptions verify_options(const RunConfig& cfg) {
    intertwining::VerifyOptions opts;
    opts.tolerance = cfg.relation_tol;
    if (cfg.block > 0) opts.block = cfg.block;
    return opts;
}

// A model plus what came with it.
struct Loaded {
    intertwining::IntertwiningModel model;
    std::optional<core::EpsilonSequence> eps;
    std::string fixture;
    RelationReport checks;       // fixture expectations or stored-file consistency
    intertwining::VerifyOptions verify;
};

Loaded load_source(const RunConfig& cfg) {
    const auto tol = tolerances(cfg);
    Loaded l;
    l.verify = verify_options(cfg);
    if (!cfg.fixture.empty()) {
        zoo::Fixture f = zoo::build_fixture(cfg.fixture, parse_params(cfg));
        l.model = std::move(f.model);
        l.eps = f.eps;
        l.fixture = f.id;
        l.checks = std::move(f.checks);
        if (cfg.block == 0) l.verify.block = f.verify.block;
        l.verify.tolerance = std::max(cfg.relation_tol, f.verify.tolerance);
        return l;
    }
    if (!cfg.model_path.empty()) {
        Json j;
        try {
            j = Json::parse(io::read_text(cfg.model_path));
        } catch (const Json::exception& e) {
            throw ParseError(cfg.model_path + ": " + e.what());
        }
        io::StoredModel s = io::model_from_json(j, tol);
        l.checks = io::stored_consistency(s, cfg.relation_tol);
        l.model = std::move(s.model);
        l.eps = s.eps;
        l.fixture = s.fixture;
        return l;
    }
    if (!cfg.random.empty()) {
        const auto x = cfg.random.find('x');
        std::size_t d1 = 0, d2 = 0;
        try {
            if (x == std::string::npos) throw std::invalid_argument("no x");
            d1 = std::stoul(cfg.random.substr(0, x));
            d2 = std::stoul(cfg.random.substr(x + 1));
        } catch (const std::exception&) {
            throw InputError("--random expects D1xD2, got '" + cfg.random + "'");
        }
        intertwining::PairOptions po;
        po.hermitian_theta1 = cfg.hermitian;
        const auto pair = intertwining::make_commuting_pair(d1, d2, resolve_seed(cfg), po);
        l.model = intertwining::build_model(pair.theta1, pair.x, tol);
        return l;
    }
    if (!cfg.theta1_path.empty() && !cfg.x_path.empty()) {
        const Matrix theta1 = io::load_matrix(cfg.theta1_path);
        const Matrix x = io::load_matrix(cfg.x_path);
        l.model = intertwining::build_model(theta1, x, tol);
        return l;
    }
    throw InputError("no input: give a model file, --fixture, --random, or --theta1 with --x");
}

void print_failures(const RelationReport& rep, std::ostream& out) {
    for (const Relation* r : rep.failures()) {
        out << "  FAIL " << r->name << ": residual " << fmt(r->residual) << " > " << fmt(r->tolerance)
            << " * max(1, " << fmt(r->scale) << ")";
        if (!r->note.empty()) out << " (" << r->note << ")";
        out << "\n";
    }
}

std::string kernel_text(const std::vector<std::size_t>& k) {
    std::string s = "{";
    for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
    return s + "}";
}

int cmd_build(const RunConfig& cfg, std::ostream& out) {
    Loaded l = load_source(cfg);
    RelationReport rep = intertwining::verify_relations(l.model, l.verify);
    rep.append(l.checks);
    io::write_text(cfg.output, io::model_to_json(l.model, rep, l.eps, l.fixture).dump(2) + "\n");
    out << "wrote " << cfg.output << ": case " << intertwining::to_string(l.model.regime) << ", "
        << l.model.dim1() << "x" << l.model.dim2() << ", kernel set " << kernel_text(l.model.kernel_set) << "\n";
    out << "checks passed " << (rep.relations.size() - rep.failures().size()) << "/" << rep.relations.size()
        << "\n";
    print_failures(rep, out);
    return rep.all_passed() ? kExitOk : kExitVerify;
}

RelationReport full_verification(const Loaded& l, double tol) {
    RelationReport rep = intertwining::verify_relations(l.model, l.verify);
    rep.append(l.checks);
    if (l.model.regime != intertwining::Regime::Invertible) {
        rep.append(intertwining::proposition1_check(l.model, tol));
        const auto ad = intertwining::adjoint_descent(l.model);
        rep.add("adjoint_descent.theta2_dagger", ad.difference, core::op_norm(l.model.theta2), tol);
    } else {
        rep.add_not_applicable("prop1", "plain invertible regime");
    }
    return rep;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    if (cfg.model_path.empty() && cfg.fixture.empty()) throw InputError("verify: no model file given");
    if (!cfg.model_path.empty() && !fs::exists(cfg.model_path)) {
        throw InputError("verify: model file '" + cfg.model_path + "' does not exist");
    }
    const Loaded l = load_source(cfg);
    const RelationReport rep = full_verification(l, cfg.relation_tol);
    if (!cfg.report.empty()) {
        Json j;
        j["case"] = std::string(intertwining::to_string(l.model.regime));
        j["passed"] = rep.all_passed();
        j["report"] = rep.to_json();
        io::write_text(cfg.report, j.dump(2) + "\n");
    }
    const std::size_t applicable =
        static_cast<std::size_t>(std::count_if(rep.relations.begin(), rep.relations.end(),
                                               [](const Relation& r) { return r.applicable; }));
    out << "case " << intertwining::to_string(l.model.regime) << ": " << (applicable - rep.failures().size())
        << "/" << applicable << " checks passed, worst relative residual " << fmt(rep.worst_relative()) << "\n";
    print_failures(rep, out);
    return rep.all_passed() ? kExitOk : kExitVerify;
}

core::EpsilonSequence sequence_for(const Loaded& l) {
    if (l.eps) return *l.eps;
    const Vector& v = l.model.eigen1.values;
    std::vector<double> e;
    double scale = 1.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) scale = std::max(scale, std::abs(v(k)));
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k).imag()) > 1e-12 * scale) {
            throw ParameterError("coherent: Theta1 eigenvalues must be real, nonnegative and increasing");
        }
        e.push_back(v(k).real());
    }
    if (!e.empty() && std::abs(e[0]) <= 1e-12 * scale) e[0] = 0.0;
    core::EpsilonSequence eps(e);
    if (!eps.strictly_increasing()) {
        throw ParameterError("coherent: Theta1 eigenvalues must satisfy 0 = eps_0 < eps_1 < ...");
    }
    return eps;
}

std::size_t pick_order(const RunConfig& cfg, std::size_t available) {
    const std::size_t order = cfg.order == 0 ? std::min(available, kDefaultTruncation) : cfg.order;
    if (order < 4) throw InputError("truncation order must be at least 4");
    if (order > available) {
        throw InputError("truncation order " + std::to_string(order) + " exceeds the " +
                         std::to_string(available) + " available eigenvectors");
    }
    return order;
}

Json convergence_json(const coherent::ConvergenceData& c) {
    return {{"r_phi", number(c.r_phi)},         {"r_psi", number(c.r_psi)},
            {"alpha_phi", number(c.alpha_phi)}, {"alpha_psi", number(c.alpha_psi)},
            {"rho_phi", number(c.rho_phi)},     {"rho_psi", number(c.rho_psi)},
            {"rho_hat", number(c.rho_hat)},     {"rho", number(c.rho)}};
}

Json measure_json(const coherent::RadialMeasure& m) {
    double worst = 0.0;
    for (double r : m.moment_residuals) worst = std::max(worst, r);
    return {{"available", true},
            {"family", "gamma"},
            {"c", m.c},
            {"a", m.a},
            {"b", m.b},
            {"p", m.p},
            {"slope", m.slope},
            {"nodes", m.radii.size()},
            {"moment_residuals", m.moment_residuals},
            {"max_moment_residual", worst}};
}

core::BiorthogonalSystem truncated(const core::BiorthogonalSystem& s, std::size_t order) {
    const auto n = static_cast<Eigen::Index>(order);
    core::BiorthogonalSystem t;
    t.phi = s.phi.leftCols(n);
    t.psi = s.psi.leftCols(n);
    t.values = s.values.head(n);
    t.pairing = s.pairing.head(n);
    return t;
}

// Rounding error of forming A phi - z phi; deep truncations push the tail
// bound far below it.
double rounding_floor(double a_norm, Complex z, const Vector& phi) {
    return 16.0 * (std::numeric_limits<double>::epsilon() / 2.0) * (a_norm + std::abs(z)) * phi.norm();
}

std::vector<Complex> z_grid(const RunConfig& cfg, double max_radius) {
    std::vector<Complex> g;
    for (std::size_t i = 1; i <= cfg.radial; ++i) {
        const double r = max_radius * static_cast<double>(i) / static_cast<double>(cfg.radial);
        for (std::size_t j = 0; j < cfg.angular; ++j) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(cfg.angular);
            g.push_back(std::polar(r, th));
        }
    }
    return g;
}

coherent::TildeFactorial convention_of(const std::string& s) {
    if (s == "original") return coherent::TildeFactorial::OriginalSequence;
    if (s == "relabeled") return coherent::TildeFactorial::Relabeled;
    throw InputError("--convention must be 'original' or 'relabeled'");
}

int cmd_coherent(const RunConfig& cfg, std::ostream& out) {
    if (cfg.radial == 0 || cfg.angular == 0) throw InputError("z-grid counts must be positive");
    if (cfg.level != 1 && cfg.level != 2) throw InputError("--level must be 1 or 2");
    const auto convention = convention_of(cfg.convention);
    const Loaded l = load_source(cfg);
    const core::EpsilonSequence eps = sequence_for(l);
    const core::BiorthogonalSystem full = l.model.level1();
    const std::size_t order = pick_order(cfg, full.size());
    const core::BiorthogonalSystem sys = truncated(full, order);

    const auto fit_phi = coherent::fit_norm_growth(sys.phi, eps);
    const auto fit_psi = coherent::fit_norm_growth(sys.psi, eps);
    const auto conv = coherent::radius(fit_phi, fit_psi, eps);
    double max_radius = cfg.max_radius;
    if (max_radius <= 0.0) {
        max_radius = std::sqrt(2.0 * eps[1]);
        if (std::isfinite(conv.rho)) max_radius = std::min(max_radius, 0.9 * conv.rho);
    }
    if (!(max_radius < conv.rho)) {
        throw DivergenceError("coherent: grid radius " + fmt(max_radius) + " is not inside the convergence disk " +
                              "(rho = " + fmt(conv.rho) + ")");
    }

    const auto ladders = coherent::build_ladders(sys, eps);
    const double a_norm = core::op_norm(ladders.lowering);
    RelationReport checks;
    std::ostringstream csv;
    csv << kCsvHeader << "\n"
        << "re_z,im_z,abs_z,normalization,overlap_re,overlap_im,eigen_residual,tail_bound,last_ratio,converged\n";
    double worst_overlap = 0.0, worst_ratio = 0.0, worst_excess = 0.0;
    bool all_converged = true;
    const auto grid = z_grid(cfg, max_radius);
    for (Complex z : grid) {
        const auto st = coherent::coherent_pair(sys, eps, z, order, conv.rho);
        const Complex ov = st.overlap();
        const double res = (ladders.lowering * st.phi - z * st.phi).norm();
        worst_overlap = std::max(worst_overlap, std::abs(ov - 1.0));
        const double floor = rounding_floor(a_norm, z, st.phi);
        worst_excess = std::max(worst_excess, res - 10.0 * st.tail_bound - floor);
        if (st.tail_bound > floor) worst_ratio = std::max(worst_ratio, res / st.tail_bound);
        all_converged = all_converged && st.converged;
        csv << fmt(z.real()) << "," << fmt(z.imag()) << "," << fmt(std::abs(z)) << "," << fmt(st.normalization)
            << "," << fmt(ov.real()) << "," << fmt(ov.imag()) << "," << fmt(res) << "," << fmt(st.tail_bound)
            << "," << fmt(st.last_ratio) << "," << (st.converged ? 1 : 0) << "\n";
    }
    checks.add("coherent.overlap", worst_overlap, 1.0, cfg.overlap_tol);
    checks.add("coherent.eigenstate_vs_tail", std::max(0.0, worst_excess), 1.0, 0.0,
               "max residual / tail bound = " + fmt(worst_ratio));
    checks.add("coherent.series_converged", all_converged ? 0.0 : 1.0, 1.0, 0.0, "last term ratio <= 0.9");
    double fact = 0.0;
    for (std::size_t n = 0; n + 1 < order; ++n) {
        const Vector v = ladders.raising * (ladders.lowering * sys.phi.col(static_cast<Eigen::Index>(n)));
        fact = std::max(fact, (v - eps[n] * sys.phi.col(static_cast<Eigen::Index>(n))).norm());
    }
    checks.add("ladder.factorization", fact, eps[order - 1], 1e-9);

    Json report;
    report["order"] = order;
    report["eps_source"] = l.eps ? "model" : "theta1 eigenvalues";
    report["convergence"] = convergence_json(conv);
    report["grid"] = {{"radial", cfg.radial}, {"angular", cfg.angular}, {"max_radius", max_radius},
                      {"points", grid.size()}};

    // Resolution of the identity on random pairs; g lies in the span of the
    // first order/2 vectors so the truncated sum is exact.
    std::mt19937_64 rng(resolve_seed(cfg));
    std::normal_distribution<double> gauss;
    const auto half = static_cast<Eigen::Index>(order / 2);
    std::optional<coherent::RadialMeasure> measure;
    std::string measure_reason;
    try {
        measure = coherent::solve_moment_measure(eps, order, cfg.nodes);
    } catch (const NoClosedFormError& e) {
        measure_reason = e.what();
    }
    std::ostringstream res_csv;
    res_csv << kCsvHeader << "\n" << "pair,lhs_re,lhs_im,rhs_re,rhs_im,residual\n";
    double worst_res = 0.0;
    for (std::size_t p = 0; p < cfg.pairs; ++p) {
        Vector f(static_cast<Eigen::Index>(sys.dim()));
        Vector b(half);
        for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = Complex(gauss(rng), gauss(rng));
        for (Eigen::Index i = 0; i < half; ++i) b(i) = Complex(gauss(rng), gauss(rng));
        const Vector g = sys.phi.leftCols(half) * b;
        const auto r = measure ? coherent::resolution_check(sys, eps, *measure, f, g, order)
                               : coherent::resolution_sum_form(sys, f, g, order);
        const double rel = r.residual / std::max(1.0, f.norm() * g.norm());
        worst_res = std::max(worst_res, rel);
        res_csv << p << "," << fmt(r.lhs.real()) << "," << fmt(r.lhs.imag()) << "," << fmt(r.rhs.real()) << ","
                << fmt(r.rhs.imag()) << "," << fmt(rel) << "\n";
    }
    checks.add("resolution.identity", worst_res, 1.0, 1e-7,
               measure ? "radial quadrature" : "sum form, no closed-form measure");
    if (measure) {
        report["measure"] = measure_json(*measure);
        double worst_moment = 0.0;
        for (double r : measure->moment_residuals) worst_moment = std::max(worst_moment, r);
        checks.add("measure.moments", worst_moment, 1.0, 1e-8);
        const Matrix a_coef = coherent::coefficients_in(sys, ladders.lowering, order);
        const Matrix b_coef = coherent::coefficients_in(sys, ladders.raising, order);
        const auto qz = coherent::quantize(coherent::Symbol::Z, sys, eps, *measure, order);
        const auto qzb = coherent::quantize(coherent::Symbol::ZBar, sys, eps, *measure, order);
        const auto blk = static_cast<Eigen::Index>(order - 2);
        const double dz = (qz.coefficients - a_coef).topLeftCorner(blk, blk).cwiseAbs().maxCoeff();
        const double dzb = (qzb.coefficients - b_coef).topLeftCorner(blk, blk).cwiseAbs().maxCoeff();
        checks.add("quantize.z_matches_lowering", dz, 1.0, 1e-8);
        checks.add("quantize.zbar_matches_raising", dzb, 1.0, 1e-8);
        report["quantization"] = {{"z", io::matrix_to_json(qz.coefficients)},
                                  {"zbar", io::matrix_to_json(qzb.coefficients)},
                                  {"max_mismatch_z", dz},
                                  {"max_mismatch_zbar", dzb}};
    } else {
        report["measure"] = {{"available", false}, {"reason", measure_reason}};
    }
    report["resolution"] = {{"mode", measure ? "quadrature" : "sum"}, {"pairs", cfg.pairs}, {"max_residual", worst_res}};

    if (cfg.level == 2) {
        const core::BiorthogonalSystem sys2 = l.model.level2();
        Json lv;
        double worst2 = 0.0;
        if (l.model.kernel_set.empty()) {
            const std::size_t o2 = std::min(order, sys2.size());
            const auto t2 = truncated(sys2, o2);
            const auto lad2 = coherent::build_ladders_level2(t2, eps, l.model.tilde_k);
            double excess = 0.0;
            const double a2_norm = core::op_norm(lad2.lowering);
            for (Complex z : grid) {
                const auto st = coherent::coherent_pair_level2(t2, eps, l.model.tilde_k, z, o2, conv.rho);
                worst2 = std::max(worst2, std::abs(st.overlap() - 1.0));
                excess = std::max(excess, (lad2.lowering * st.phi - z * st.phi).norm() - 10.0 * st.tail_bound -
                                              rounding_floor(a2_norm, z, st.phi));
            }
            checks.add("level2.eigenstate_vs_tail", std::max(0.0, excess), 1.0, 0.0);
            lv["mode"] = "direct";
        } else {
            std::size_t survivors = 0;
            for (std::size_t k = 0; k < sys2.size(); ++k) survivors += l.model.in_kernel(k) ? 0 : 1;
            const std::size_t o2 = std::min(order, survivors);
            bool conv2 = true;
            for (Complex z : grid) {
                const auto fs2 = coherent::filter_and_build(sys2, eps, l.model.tilde_k, l.model.kernel_set, z, o2,
                                                            convention, conv.rho);
                worst2 = std::max(worst2, std::abs(fs2.state.overlap() - 1.0));
                conv2 = conv2 && fs2.state.converged;
            }
            checks.add("level2.filtered_converged", conv2 ? 0.0 : 1.0, 1.0, 0.0);
            lv["mode"] = "filtered";
            lv["convention"] = cfg.convention;
            lv["order"] = o2;
        }
        checks.add("level2.overlap", worst2, 1.0, cfg.overlap_tol);
        lv["max_overlap_defect"] = worst2;
        report["level2"] = lv;
    }

    report["checks"] = checks.to_json();
    report["passed"] = checks.all_passed();
    const fs::path dir(cfg.output_dir);
    io::write_text(dir / "coherent.csv", csv.str());
    io::write_text(dir / "resolution.csv", res_csv.str());
    io::write_text(dir / "coherent_report.json", report.dump(2) + "\n");

    out << "rho = " << fmt(conv.rho) << "; measure: "
        << (measure ? "solved (gamma family, s = " + fmt(measure->slope) + ")" : "unavailable") << "; "
        << grid.size() << " grid points; checks passed " << (checks.relations.size() - checks.failures().size())
        << "/" << checks.relations.size() << "\n";
    print_failures(checks, out);
    return checks.all_passed() ? kExitOk : kExitVerify;
}

int cmd_quantize(const RunConfig& cfg, std::ostream& out) {
    const auto symbol = coherent::symbol_from_string(cfg.symbol);
    const Loaded l = load_source(cfg);
    const core::EpsilonSequence eps = sequence_for(l);
    const core::BiorthogonalSystem full = l.model.level1();
    const std::size_t order = pick_order(cfg, full.size());
    const core::BiorthogonalSystem sys = truncated(full, order);
    const auto measure = coherent::solve_moment_measure(eps, order, cfg.nodes);
    const auto q = coherent::quantize(symbol, sys, eps, measure, order);
    const auto ladders = coherent::build_ladders(sys, eps);
    const Matrix ref = coherent::coefficients_in(
        sys, symbol == coherent::Symbol::Z ? ladders.lowering : ladders.raising, order);
    const auto blk = static_cast<Eigen::Index>(order - 2);
    const double diff = (q.coefficients - ref).topLeftCorner(blk, blk).cwiseAbs().maxCoeff();
    Json j;
    j["symbol"] = std::string(coherent::to_string(symbol));
    j["order"] = order;
    j["coefficients"] = io::matrix_to_json(q.coefficients);
    j["operator"] = io::matrix_to_json(q.op);
    j["max_ladder_mismatch"] = diff;
    const std::string path = cfg.report.empty() ? (fs::path(cfg.output_dir) / "quantize.json").string() : cfg.report;
    io::write_text(path, j.dump(2) + "\n");
    const bool ok = diff <= 1e-8;
    out << "quantized " << coherent::to_string(symbol) << " at order " << order << "; ladder mismatch "
        << fmt(diff) << (ok ? "" : " (FAIL)") << "; wrote " << path << "\n";
    return ok ? kExitOk : kExitVerify;
}

int cmd_fixture_list(std::ostream& out) {
    const std::vector<std::pair<std::string, std::string>> rows = {
        {"ex2x2", "2x2 quaternion-like X, invertible with N1 = N2 scalar (x11, x12)"},
        {"ex3x3", "3x3 seed mapped to 2x2, one eigenvalue lost (E1, E2, E3)"},
        {"shift", "diagonal seed with phases and a shift intertwiner (N, slope|eps, theta_step|theta)"},
        {"block", "2x2 blocks filtered through a tight frame (N, alpha, beta)"},
        {"coherent_demo", "block fixture with eigenvalues 2 n alpha1 (alpha1, N)"},
    };
    for (const auto& [id, text] : rows) out << id << "\t" << text << "\n";
    return kExitOk;
}

// Values from a JSON config file for options that were not given on the
// command line. Keys are long option names; a nested object under the
// command name applies to that command only.
void apply_config(CLI::App* sub, const std::string& path) {
    Json j;
    try {
        j = Json::parse(io::read_text(path));
    } catch (const Json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(path + ": config must be a JSON object");
    Json flat = Json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it->is_object()) flat[it.key()] = *it;
    }
    if (j.contains(sub->get_name()) && j.at(sub->get_name()).is_object()) {
        for (auto it = j.at(sub->get_name()).begin(); it != j.at(sub->get_name()).end(); ++it) {
            flat[it.key()] = *it;
        }
    }
    for (auto it = flat.begin(); it != flat.end(); ++it) {
        std::string name = it.key();
        std::replace(name.begin(), name.end(), '_', '-');
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + name);
        } catch (const CLI::OptionNotFound&) {
            continue;  // key for another command
        }
        if (opt->count() > 0) continue;
        auto as_text = [](const Json& v) {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
            if (v.is_number_integer()) return std::to_string(v.get<long long>());
            if (v.is_number()) return io::format_double(v.get<double>());
            return v.dump();
        };
        if (it->is_array()) {
            for (const auto& e : *it) opt->add_result(as_text(e));
        } else {
            opt->add_result(as_text(*it));
        }
        opt->run_callback();
    }
}

void add_source_options(CLI::App* sub, RunConfig& cfg, bool matrices) {
    sub->add_option("--fixture", cfg.fixture, "Fixture id (see 'fixture list')");
    sub->add_option("--params", cfg.params, "Fixture parameters k=v,k=v (complex as a+bi, lists as a;b;c)");
    sub->add_option("--params-json", cfg.params_json, "Fixture parameters as a JSON object");
    if (matrices) {
        sub->add_option("--theta1", cfg.theta1_path, "Seed operator file (.json or .csv)");
        sub->add_option("--x", cfg.x_path, "Intertwiner file (.json or .csv)");
        sub->add_option("--random", cfg.random, "Random commuting pair of shape D1xD2");
        sub->add_flag("--hermitian", cfg.hermitian, "Random pair with self-adjoint Theta1");
    }
    sub->add_option("--seed", cfg.seed, "RNG seed (default: ISOSPEC_SEED or 0)");
    sub->add_option("--relation-tol", cfg.relation_tol, "Relative tolerance for operator identities")
        ->capture_default_str();
    sub->add_option("--kernel-tol", cfg.kernel_tol, "Relative threshold for X^dagger phi = 0")
        ->capture_default_str();
    sub->add_option("--config", cfg.config_path, "JSON config file; command-line flags take precedence");
}

int dispatch(CLI::App& app, RunConfig& cfg, std::ostream& out) {
    CLI::App* active = nullptr;
    for (CLI::App* s : app.get_subcommands()) active = s;
    if (active == nullptr) throw InputError("no command given (try --help)");
    CLI::App* leaf = active;
    for (CLI::App* s : active->get_subcommands()) leaf = s;
    if (!cfg.config_path.empty()) apply_config(leaf, cfg.config_path);

    const std::string name = active->get_name();
    if (name == "build") return cmd_build(cfg, out);
    if (name == "verify") return cmd_verify(cfg, out);
    if (name == "coherent") return cmd_coherent(cfg, out);
    if (name == "quantize") return cmd_quantize(cfg, out);
    if (name == "fixture") {
        if (leaf->get_name() == "list") return cmd_fixture_list(out);
        if (leaf->get_name() == "build") return cmd_build(cfg, out);
    }
    throw InputError("unknown command");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"isospec: intertwined non-self-adjoint models and bicoherent states"};
    app.require_subcommand(1);

    auto* build = app.add_subcommand("build", "Build a model and write it as JSON");
    add_source_options(build, cfg, true);
    build->add_option("-o,--output", cfg.output, "Model file to write")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "Check every relation of a stored model");
    verify->add_option("model", cfg.model_path, "Model JSON file");
    add_source_options(verify, cfg, false);
    verify->add_option("--report", cfg.report, "Write the JSON report here");
    verify->add_option("--block", cfg.block, "Restrict operator residuals to the leading block (0: off)");

    auto* coh = app.add_subcommand("coherent", "Sweep bicoherent states over a polar z grid");
    coh->add_option("model", cfg.model_path, "Model JSON file");
    add_source_options(coh, cfg, false);
    coh->add_option("--order", cfg.order, "Truncation order (0: min(size, 40))")->capture_default_str();
    coh->add_option("--level", cfg.level, "1, or 2 to add the level-2 states")->capture_default_str();
    coh->add_option("--radial", cfg.radial, "Radii in the z grid")->capture_default_str();
    coh->add_option("--angular", cfg.angular, "Angles in the z grid")->capture_default_str();
    coh->add_option("--max-radius", cfg.max_radius, "Largest |z| (0: min(sqrt(2 eps_1), 0.9 rho))")
        ->capture_default_str();
    coh->add_option("--nodes", cfg.nodes, "Gauss-Laguerre nodes")->capture_default_str();
    coh->add_option("--pairs", cfg.pairs, "Random (f, g) pairs for the resolution check")->capture_default_str();
    coh->add_option("--overlap-tol", cfg.overlap_tol, "Tolerance on |<phi(z), psi(z)> - 1|")
        ->capture_default_str();
    coh->add_option("--convention", cfg.convention, "Filtered-state factorial: original or relabeled")
        ->capture_default_str();
    coh->add_option("--output-dir", cfg.output_dir, "Directory for CSV and report files")->capture_default_str();

    auto* quant = app.add_subcommand("quantize", "Coherent-state quantization of z or zbar");
    quant->add_option("model", cfg.model_path, "Model JSON file");
    add_source_options(quant, cfg, false);
    quant->add_option("--symbol", cfg.symbol, "z or zbar")->capture_default_str();
    quant->add_option("--order", cfg.order, "Truncation order (0: min(size, 40))")->capture_default_str();
    quant->add_option("--nodes", cfg.nodes, "Gauss-Laguerre nodes")->capture_default_str();
    quant->add_option("--output-dir", cfg.output_dir, "Directory for quantize.json")->capture_default_str();
    quant->add_option("--report", cfg.report, "Output file (overrides --output-dir)");

    auto* fix = app.add_subcommand("fixture", "Built-in examples");
    fix->require_subcommand(1);
    fix->add_subcommand("list", "List fixture ids");
    auto* fbuild = fix->add_subcommand("build", "Build a fixture model");
    fbuild->add_option("id", cfg.fixture, "Fixture id")->required();
    fbuild->add_option("--params", cfg.params, "Parameters k=v,k=v");
    fbuild->add_option("--params-json", cfg.params_json, "Parameters as a JSON object");
    fbuild->add_option("-o,--output", cfg.output, "Model file to write")->capture_default_str();
    fbuild->add_option("--config", cfg.config_path, "JSON config file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        return dispatch(app, cfg, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DimensionError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const CLI::Error& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const fs::filesystem_error& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

int main_entry(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace isospec::cli
