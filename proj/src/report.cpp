#include "isospec/report.hpp"

#include <algorithm>
#include <cmath>

namespace isospec {

double Relation::relative() const { return residual / std::max(1.0, scale); }

Relation& RelationReport::add(std::string name, double residual, double scale, double tolerance,
                              std::string note) {
    Relation r;
    r.name = std::move(name);
    r.residual = residual;
    r.scale = scale;
    r.tolerance = tolerance;
    r.note = std::move(note);
    // NaN residuals fail.
    r.passed = residual <= tolerance * std::max(1.0, scale);
    relations.push_back(std::move(r));
    return relations.back();
}

Relation& RelationReport::add_not_applicable(std::string name, std::string note) {
    Relation r;
    r.name = std::move(name);
    r.applicable = false;
    r.passed = true;
    r.note = std::move(note);
    relations.push_back(std::move(r));
    return relations.back();
}

void RelationReport::append(const RelationReport& other, const std::string& prefix) {
    for (Relation r : other.relations) {
        r.name = prefix + r.name;
        relations.push_back(std::move(r));
    }
}

bool RelationReport::all_passed() const {
    return std::all_of(relations.begin(), relations.end(),
                       [](const Relation& r) { return !r.applicable || r.passed; });
}

const Relation* RelationReport::find(const std::string& name) const {
    for (const auto& r : relations) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

std::vector<const Relation*> RelationReport::failures() const {
    std::vector<const Relation*> out;
    for (const auto& r : relations) {
        if (r.applicable && !r.passed) out.push_back(&r);
    }
    return out;
}

double RelationReport::worst_relative() const {
    double worst = 0.0;
    for (const auto& r : relations) {
        if (r.applicable) worst = std::max(worst, r.relative());
    }
    return worst;
}

nlohmann::json RelationReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : relations) {
        nlohmann::json j{{"name", r.name}, {"applicable", r.applicable}, {"passed", r.passed}};
        if (r.applicable) {
            j["residual"] = std::isfinite(r.residual) ? nlohmann::json(r.residual) : nlohmann::json("nan");
            j["scale"] = r.scale;
            j["tolerance"] = r.tolerance;
        }
        if (!r.note.empty()) j["note"] = r.note;
        arr.push_back(std::move(j));
    }
    return nlohmann::json{{"all_passed", all_passed()}, {"relations", std::move(arr)}};
}

}  // namespace isospec
