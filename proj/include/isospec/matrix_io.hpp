// matrix_io.hpp - JSON and CSV encodings of complex matrices
//
// JSON: {"rows": r, "cols": c, "data": [[re, im], ...]} in row-major order.
// CSV:  one line per row, interleaved re,im columns (2*cols fields).

#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

#include "isospec/operator_core.hpp"

namespace isospec::io {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

std::string matrix_to_csv(const Matrix& m);
Matrix matrix_from_csv(std::string_view text);

// Dispatches on the extension (.json or .csv).
Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

// printf("%.17g") so every double round-trips.
std::string format_double(double x);

}  // namespace isospec::io
