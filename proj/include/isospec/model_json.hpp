// model_json.hpp - the isospec-model-v1 file format
//
// {"schema": "isospec-model-v1", "case": ..., "theta1": M, "X": M, "theta2": M,
//  "eigenvalues": V, "phi1": M, "kernel_set": [...], "tilde_k": [...],
//  "eps": [...] (optional), "fixture": id (optional), "residuals": {name: value}}
// where M and V are matrix_io encodings.

#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "isospec/intertwining.hpp"
#include "isospec/operator_core.hpp"
#include "isospec/report.hpp"

namespace isospec::io {

inline constexpr const char* kModelSchema = "isospec-model-v1";

struct StoredModel {
    intertwining::IntertwiningModel model;  // rebuilt around the stored Theta2
    std::optional<core::EpsilonSequence> eps;
    std::string fixture;
    // Values as written in the file, for comparison with the rebuilt model.
    intertwining::Regime stored_case{intertwining::Regime::NonInvertible};
    std::vector<std::size_t> stored_kernel_set;
    RealVector stored_tilde_k;
};

nlohmann::json model_to_json(const intertwining::IntertwiningModel& model, const RelationReport& residuals,
                             const std::optional<core::EpsilonSequence>& eps = std::nullopt,
                             const std::string& fixture = {});

// Throws ParseError on schema violations.
StoredModel model_from_json(const nlohmann::json& j, const intertwining::Tolerances& tol = {});

// Stored case, kernel set and k-tilde against what the matrices imply.
RelationReport stored_consistency(const StoredModel& stored, double tol = kDefaultRelationTol);

}  // namespace isospec::io
