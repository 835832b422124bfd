// report.hpp - named residuals with pass/fail at a stated tolerance

#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace isospec {

// One checked identity. `residual` is an absolute norm; the check passes
// when residual <= tolerance * max(1, scale), where `scale` is the natural
// magnitude of the terms being compared.
struct Relation {
    std::string name;
    double residual{0.0};
    double scale{1.0};
    double tolerance{0.0};
    bool applicable{true};
    bool passed{true};
    std::string note;

    double relative() const;
};

struct RelationReport {
    std::vector<Relation> relations;

    Relation& add(std::string name, double residual, double scale, double tolerance,
                  std::string note = {});
    Relation& add_not_applicable(std::string name, std::string note);
    void append(const RelationReport& other, const std::string& prefix = {});

    bool all_passed() const;
    const Relation* find(const std::string& name) const;
    std::vector<const Relation*> failures() const;
    // Largest relative residual among applicable relations.
    double worst_relative() const;

    nlohmann::json to_json() const;
};

}  // namespace isospec
