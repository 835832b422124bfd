#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "isospec/cli.hpp"
#include "isospec/matrix_io.hpp"
#include "isospec/model_zoo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace isospec;

namespace {

struct Sandbox {
    fs::path dir;
    explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / ("isospec_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
    std::string path(const std::string& f) const { return (dir / f).string(); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(ISOSPEC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const std::string& p) { return json::parse(io::read_text(p)); }

}  // namespace

TEST_CASE("fixture list and build") {
    Sandbox sb("fixture");
    const auto list = run({"fixture", "list"});
    CHECK(list.code == cli::kExitOk);
    for (const auto& id : zoo::fixture_ids()) CHECK(list.out.find(id) != std::string::npos);

    const auto built = run({"fixture", "build", "ex3x3", "-o", sb.path("m.json")});
    CHECK(built.code == cli::kExitOk);
    const json m = read_json(sb.path("m.json"));
    CHECK(m.at("schema") == "isospec-model-v1");
    CHECK(m.at("case") == "NonInvertible");
    CHECK(m.at("kernel_set") == json::array({2}));
    CHECK(m.at("fixture") == "ex3x3");
    CHECK(m.at("tilde_k")[0].get<double>() == doctest::Approx(1.5));
    CHECK(m.at("residuals").contains("ex3x3.theta2_closed_form"));
}

TEST_CASE("build, verify and a corrupted file") {
    Sandbox sb("verify");
    REQUIRE(run({"build", "--random", "7x4", "--seed", "3", "-o", sb.path("r.json")}).code == cli::kExitOk);
    const auto ok = run({"verify", sb.path("r.json"), "--report", sb.path("rep.json")});
    CHECK(ok.code == cli::kExitOk);
    CHECK(read_json(sb.path("rep.json")).at("passed") == true);

    json m = read_json(sb.path("r.json"));
    m["theta2"]["data"][1][0] = m["theta2"]["data"][1][0].get<double>() + 1e-3;
    io::write_text(sb.path("bad.json"), m.dump());
    const auto bad = run({"verify", sb.path("bad.json")});
    CHECK(bad.code == cli::kExitVerify);
    CHECK(bad.out.find("FAIL") != std::string::npos);

    json k = read_json(sb.path("r.json"));
    k["kernel_set"] = json::array({0});
    io::write_text(sb.path("kern.json"), k.dump());
    const auto kern = run({"verify", sb.path("kern.json")});
    CHECK(kern.code == cli::kExitVerify);
    CHECK(kern.out.find("stored.kernel_set") != std::string::npos);
}

TEST_CASE("matrix files as input") {
    Sandbox sb("matrices");
    const auto pair = intertwining::make_commuting_pair(5, 3, 8);
    io::save_matrix(sb.path("t.csv"), pair.theta1);
    io::save_matrix(sb.path("x.json"), pair.x);
    const auto r = run({"build", "--theta1", sb.path("t.csv"), "--x", sb.path("x.json"), "-o", sb.path("m.json")});
    CHECK(r.code == cli::kExitOk);
    CHECK(read_json(sb.path("m.json")).at("case") == "NonInvertible");
}

TEST_CASE("fixture parameters from the command line") {
    Sandbox sb("params");
    CHECK(run({"build", "--fixture", "ex2x2", "--params", "x11=1+2i,x12=-0.5i", "-o", sb.path("a.json")}).code ==
          cli::kExitOk);
    CHECK(run({"build", "--fixture", "shift", "--params", "N=6,theta=0.1;0.2;0.3;0.4;0.5;0.6", "-o",
               sb.path("b.json")})
              .code == cli::kExitOk);
    CHECK(run({"build", "--fixture", "ex2x2", "--params", "x11=0,x12=0", "-o", sb.path("c.json")}).code ==
          cli::kExitDomain);
    CHECK(run({"build", "--fixture", "ex2x2", "--params", "x11", "-o", sb.path("d.json")}).code == cli::kExitInput);
    CHECK(run({"build", "--fixture", "ex2x2", "--params", "x99=1", "-o", sb.path("e.json")}).code ==
          cli::kExitInput);
}

TEST_CASE("config file fills options not given on the command line") {
    Sandbox sb("config");
    io::write_text(sb.path("cfg.json"),
                   json{{"fixture", "block"}, {"params", "N=3"}, {"build", {{"output", sb.path("from_cfg.json")}}}}
                       .dump());
    CHECK(run({"build", "--config", sb.path("cfg.json")}).code == cli::kExitOk);
    CHECK(read_json(sb.path("from_cfg.json")).at("X").at("cols") == 3);
    CHECK(run({"build", "--config", sb.path("cfg.json"), "-o", sb.path("cli.json")}).code == cli::kExitOk);
    CHECK(fs::exists(sb.path("cli.json")));
    io::write_text(sb.path("broken.json"), "{not json");
    CHECK(run({"build", "--config", sb.path("broken.json")}).code == cli::kExitInput);
}

TEST_CASE("coherent sweep writes csv and report") {
    Sandbox sb("coherent");
    const auto r = run({"coherent", "--fixture", "coherent_demo", "--params", "alpha1=1,N=20", "--order", "30",
                        "--level", "2", "--radial", "4", "--angular", "4", "--output-dir", sb.dir.string()});
    CHECK(r.code == cli::kExitOk);
    const std::string csv = io::read_text(sb.path("coherent.csv"));
    CHECK(csv.rfind("# isospec-csv-v1\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 2 + 16);
    const json rep = read_json(sb.path("coherent_report.json"));
    CHECK(rep.at("passed") == true);
    CHECK(rep.at("convergence").at("rho") == "inf");
    CHECK(rep.at("measure").at("available") == true);
    CHECK(rep.at("level2").at("mode") == "filtered");
    CHECK(io::read_text(sb.path("resolution.csv")).rfind("# isospec-csv-v1\n", 0) == 0);
}

TEST_CASE("coherent rejects complex spectra and bad options") {
    Sandbox sb("coherent_err");
    REQUIRE(run({"fixture", "build", "ex2x2", "-o", sb.path("ex.json")}).code == cli::kExitOk);
    CHECK(run({"coherent", sb.path("ex.json"), "--output-dir", sb.dir.string()}).code == cli::kExitDomain);
    CHECK(run({"coherent", "--fixture", "shift", "--order", "2"}).code == cli::kExitInput);
    CHECK(run({"coherent", "--fixture", "shift", "--convention", "other"}).code == cli::kExitInput);
}

TEST_CASE("quantize") {
    Sandbox sb("quantize");
    const auto r = run({"quantize", "--fixture", "shift", "--params", "N=24", "--symbol", "zbar", "--order", "20",
                        "--report", sb.path("q.json")});
    CHECK(r.code == cli::kExitOk);
    const json q = read_json(sb.path("q.json"));
    CHECK(q.at("symbol") == "zbar");
    CHECK(q.at("max_ladder_mismatch").get<double>() < 1e-8);
    CHECK(run({"quantize", "--fixture", "shift", "--symbol", "w"}).code == cli::kExitDomain);
}

TEST_CASE("binary exit codes") {
    Sandbox sb("binary");
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("") == 1);
    CHECK(run_binary("frobnicate") == 1);
    CHECK(run_binary("verify " + sb.path("missing.json")) == 1);
    CHECK(run_binary("fixture build ex3x3 -o " + sb.path("m.json")) == 0);
    CHECK(run_binary("verify " + sb.path("m.json")) == 0);
    CHECK(run_binary("build --random 4x4") == 1);
}

TEST_CASE("square singular X is a domain error") {
    Sandbox sb("singular");
    Matrix t = Matrix::Zero(2, 2);
    t(0, 0) = 1.0;
    t(1, 1) = 2.0;
    Matrix x = Matrix::Zero(2, 2);
    x(0, 0) = 1.0;
    io::save_matrix(sb.path("t.csv"), t);
    io::save_matrix(sb.path("x.csv"), x);
    const auto r = run({"build", "--theta1", sb.path("t.csv"), "--x", sb.path("x.csv"), "-o", sb.path("m.json")});
    CHECK(r.code == cli::kExitDomain);
    CHECK(r.err.find("square") != std::string::npos);
}

TEST_CASE("normalization column of the demo sweep") {
    Sandbox sb("demo_column");
    REQUIRE(run({"coherent", "--fixture", "coherent_demo", "--params", "alpha1=1", "--output-dir", sb.dir.string()})
                .code == cli::kExitOk);
    std::istringstream csv(io::read_text(sb.path("coherent.csv")));
    std::string line;
    std::getline(csv, line);
    std::getline(csv, line);
    CHECK(line.rfind("re_z,im_z,abs_z,normalization,", 0) == 0);
    std::size_t rows = 0;
    double worst = 0.0;
    while (std::getline(csv, line)) {
        std::vector<double> v;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
        REQUIRE(v.size() == 10);
        worst = std::max(worst, std::abs(v[3] - std::exp(-v[2] * v[2] / 4.0)));
        ++rows;
    }
    CHECK(rows == 320);
    CHECK(worst < 1e-9);
}

TEST_CASE("sequences without a closed-form measure fall back to the sum form") {
    Sandbox sb("fallback");
    const auto r = run({"coherent", "--fixture", "shift", "--params", "N=12,eps=0;1;3;4;7;9;12;15;17;20;24;30",
                        "--output-dir", sb.dir.string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("measure: unavailable") != std::string::npos);
    const json rep = read_json(sb.path("coherent_report.json"));
    CHECK(rep.at("measure").at("available") == false);
    CHECK(rep.at("resolution").at("mode") == "sum");
    CHECK(rep.at("resolution").at("max_residual").get<double>() < 1e-7);
}

TEST_CASE("reports are byte-identical across runs") {
    Sandbox sb("determinism");
    const std::vector<std::string> args = {"coherent", "--fixture", "shift", "--params", "N=16", "--level", "2",
                                           "--output-dir", sb.dir.string()};
    REQUIRE(run(args).code == cli::kExitOk);
    const std::string first = io::read_text(sb.path("coherent_report.json"));
    const std::string first_csv = io::read_text(sb.path("coherent.csv"));
    REQUIRE(run(args).code == cli::kExitOk);
    CHECK(io::read_text(sb.path("coherent_report.json")) == first);
    CHECK(io::read_text(sb.path("coherent.csv")) == first_csv);
}
