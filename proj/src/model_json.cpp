#include "isospec/model_json.hpp"

#include <cmath>
#include <limits>

#include "isospec/errors.hpp"
#include "isospec/matrix_io.hpp"

namespace isospec::io {

namespace {

const Json& require(const Json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("model: missing field '") + key + "'");
    return j.at(key);
}

}  // namespace

Json model_to_json(const intertwining::IntertwiningModel& model, const RelationReport& residuals,
                   const std::optional<core::EpsilonSequence>& eps, const std::string& fixture) {
    Json j;
    j["schema"] = kModelSchema;
    j["case"] = std::string(intertwining::to_string(model.regime));
    j["theta1"] = matrix_to_json(model.theta1);
    j["X"] = matrix_to_json(model.x);
    j["theta2"] = matrix_to_json(model.theta2);
    j["eigenvalues"] = vector_to_json(model.eigen1.values);
    j["phi1"] = matrix_to_json(model.eigen1.vectors);
    j["kernel_set"] = model.kernel_set;
    j["tilde_k"] = std::vector<double>(model.tilde_k.data(), model.tilde_k.data() + model.tilde_k.size());
    if (eps) j["eps"] = eps->values();
    if (!fixture.empty()) j["fixture"] = fixture;
    Json res = Json::object();
    for (const auto& r : residuals.relations) {
        if (r.applicable) res[r.name] = r.residual;
    }
    j["residuals"] = res;
    return j;
}

StoredModel model_from_json(const Json& j, const intertwining::Tolerances& tol) {
    if (!j.is_object()) throw ParseError("model: expected a JSON object");
    if (!j.contains("schema") || j.at("schema") != kModelSchema) {
        throw ParseError(std::string("model: schema must be '") + kModelSchema + "'");
    }
    StoredModel s;
    try {
        s.stored_case = intertwining::regime_from_string(require(j, "case").get<std::string>());
        s.stored_kernel_set = require(j, "kernel_set").get<std::vector<std::size_t>>();
        const auto tk = require(j, "tilde_k").get<std::vector<double>>();
        s.stored_tilde_k = Eigen::Map<const RealVector>(tk.data(), static_cast<Eigen::Index>(tk.size()));
        if (j.contains("eps")) s.eps = core::EpsilonSequence(j.at("eps").get<std::vector<double>>());
        if (j.contains("fixture")) s.fixture = j.at("fixture").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    const Matrix theta1 = matrix_from_json(require(j, "theta1"));
    const Matrix x = matrix_from_json(require(j, "X"));
    const Matrix theta2 = matrix_from_json(require(j, "theta2"));
    core::Eigensystem es;
    if (j.contains("phi1") && j.contains("eigenvalues")) {
        es = core::eigensystem_from(theta1, vector_from_json(j.at("eigenvalues")), matrix_from_json(j.at("phi1")),
                                    tol.multiplicity);
    } else {
        es = core::eig(theta1, tol.multiplicity);
    }
    if (!es.simple_spectrum) throw SpectrumError("model: Theta1 spectrum is not simple");
    s.model = intertwining::assemble_model(theta1, x, theta2, s.stored_case, es, tol);
    return s;
}

RelationReport stored_consistency(const StoredModel& stored, double tol) {
    RelationReport rep;
    const auto& m = stored.model;
    try {
        const auto actual = intertwining::classify(m.theta1, m.x, tol);
        rep.add("stored.case", actual == stored.stored_case ? 0.0 : 1.0, 1.0, 0.0,
                "file says " + std::string(intertwining::to_string(stored.stored_case)) + ", matrices give " +
                    std::string(intertwining::to_string(actual)));
    } catch (const RegimeError& e) {
        rep.add("stored.case", 1.0, 1.0, 0.0, e.what());
    }
    rep.add("stored.kernel_set", stored.stored_kernel_set == m.kernel_set ? 0.0 : 1.0, 1.0, 0.0);
    double dk = std::numeric_limits<double>::infinity();
    if (stored.stored_tilde_k.size() == m.tilde_k.size()) {
        dk = m.tilde_k.size() == 0 ? 0.0 : (stored.stored_tilde_k - m.tilde_k).cwiseAbs().maxCoeff();
    }
    const double scale = m.tilde_k.size() == 0 ? 1.0 : m.tilde_k.cwiseAbs().maxCoeff();
    rep.add("stored.tilde_k", dk, scale, tol);
    return rep;
}

}  // namespace isospec::io
