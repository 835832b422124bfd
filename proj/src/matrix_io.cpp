#include "isospec/matrix_io.hpp"

#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace isospec::io {

namespace {

double require_number(const Json& v, const char* what) {
    if (!v.is_number()) throw ParseError(std::string("matrix JSON: ") + what + " is not a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(std::string("matrix JSON: ") + what + " is not finite");
    return x;
}

Complex pair_from_json(const Json& e) {
    if (!e.is_array() || e.size() != 2) {
        throw ParseError("matrix JSON: each entry must be a [re, im] pair");
    }
    return {require_number(e[0], "real part"), require_number(e[1], "imaginary part")};
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json data = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            data.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
        }
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
        throw ParseError("matrix JSON: expected an object with rows, cols and data");
    }
    if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer()) {
        throw ParseError("matrix JSON: rows/cols must be integers");
    }
    const auto rows = j["rows"].get<long long>();
    const auto cols = j["cols"].get<long long>();
    if (rows < 1 || cols < 1) throw ParseError("matrix JSON: rows and cols must be >= 1");
    const Json& data = j["data"];
    if (!data.is_array() || static_cast<long long>(data.size()) != rows * cols) {
        std::ostringstream os;
        os << "matrix JSON: data must hold rows*cols = " << rows * cols << " entries";
        throw ParseError(os.str());
    }
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = pair_from_json(data[k++]);
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json data = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(Json::array({v(i).real(), v(i).imag()}));
    return data;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw ParseError("vector JSON: expected an array of [re, im] pairs");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = pair_from_json(j[i]);
    return v;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string matrix_to_csv(const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_double(m(i, j).real());
            out += ',';
            out += format_double(m(i, j).imag());
        }
        out += '\n';
    }
    return out;
}

Matrix matrix_from_csv(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> fields;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            // strtod, not stod: stod throws on subnormals
            char* end = nullptr;
            const double x = std::strtod(cell.c_str(), &end);
            std::size_t used = static_cast<std::size_t>(end - cell.c_str());
            while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
            if (used == 0 || used != cell.size() || !std::isfinite(x)) {
                std::ostringstream os;
                os << "matrix CSV line " << line_no << ": bad field '" << cell << "'";
                throw ParseError(os.str());
            }
            fields.push_back(x);
        }
        if (fields.empty() || fields.size() % 2 != 0) {
            std::ostringstream os;
            os << "matrix CSV line " << line_no << ": expected an even number of re,im fields";
            throw ParseError(os.str());
        }
        if (!rows.empty() && rows.front().size() != fields.size()) {
            std::ostringstream os;
            os << "matrix CSV line " << line_no << ": ragged row";
            throw ParseError(os.str());
        }
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw ParseError("matrix CSV: no rows");
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.front().size() / 2);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            m(i, j) = Complex(rows[i][2 * j], rows[i][2 * j + 1]);
        }
    }
    return m;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

Matrix load_matrix(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    if (path.extension() == ".csv") return matrix_from_csv(text);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return matrix_from_json(j);
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
    if (path.extension() == ".csv") {
        write_text(path, matrix_to_csv(m));
    } else {
        write_text(path, matrix_to_json(m).dump(2) + "\n");
    }
}

}  // namespace isospec::io
