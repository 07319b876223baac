#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "sinkgeo/io.hpp"
#include "test_helpers.hpp"

namespace {

const std::string kCli = SINKGEO_CLI_PATH;

std::string art(const std::string& name) {
    std::filesystem::create_directories("cli_test_artifacts");
    return (std::filesystem::path("cli_test_artifacts") / name).string();
}

int run(const std::string& args) {
    const std::string cmd = "\"" + kCli + "\" " + args + " 2> /dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Parse a figure CSV: one '#' parameter line, one column-name line, rows.
std::vector<std::vector<double>> csv_rows(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    bool saw_params = false, saw_columns = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            saw_params = true;
            continue;
        }
        if (!saw_columns) {
            saw_columns = true;  // column names
            continue;
        }
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    REQUIRE(saw_params);
    REQUIRE(saw_columns);
    return rows;
}

void write_pair_inputs(const std::string& space_path, const std::string& mu_path,
                       const std::string& nu_path) {
    // delta_0 against the uniform measure on {+1, -1}, epsilon = 1.
    sinkgeo::io::write_text_file(
        space_path, R"({"points": [[0.0], [1.0], [-1.0]], "cost": "sqeuclidean", "epsilon": 1.0})");
    sinkgeo::io::write_text_file(mu_path, R"({"weights": [1.0, 0.0, 0.0]})");
    sinkgeo::io::write_text_file(nu_path, R"({"weights": [0.0, 0.5, 0.5]})");
}

}  // namespace

TEST_CASE("cli computes the two-dirac divergence to closed-form accuracy") {
    const std::string space = art("space.json"), mu = art("mu.json"), nu = art("nu.json");
    write_pair_inputs(space, mu, nu);
    const std::string out = art("sdiv.json");
    const int code = run("--quiet compute sdiv --space " + space + " --mu " + mu + " --nu " + nu +
                         " --tol 1e-13 --out " + out);
    CHECK(code == 0);

    auto j = nlohmann::json::parse(slurp(out));
    const double expected = reference()["triangle"]["sdiv_0_r_over_eps"].get<double>();
    CHECK(std::abs(j["value"].get<double>() - expected) < 1e-10);
    CHECK(j["iterations"].get<int>() > 0);
    CHECK(j["residual"].get<double>() <= 1e-13);
}

TEST_CASE("cli outputs are byte-identical across runs") {
    const std::string space = art("space.json"), mu = art("mu.json"), nu = art("nu.json");
    write_pair_inputs(space, mu, nu);
    const std::string out1 = art("rep1.json"), out2 = art("rep2.json");
    CHECK(run("--quiet validate --suite core --seed 7 --out " + out1) == 0);
    CHECK(run("--quiet validate --suite core --seed 7 --out " + out2) == 0);
    const std::string first = slurp(out1);
    CHECK(first == slurp(out2));

    auto report = nlohmann::json::parse(first);
    CHECK(report["passed"].get<bool>());
    CHECK(report["suite"] == "core");
    CHECK(report["checks"].is_array());
    CHECK(!report["checks"].empty());

    const std::string t1 = art("tensor1.json"), t2 = art("tensor2.json");
    const std::string tangent = art("tangent.json");
    sinkgeo::io::write_text_file(tangent, R"({"weights": [0.0, 0.1, -0.1]})");
    CHECK(run("--quiet compute tensor --space " + space + " --mu " + nu + " --tangent " + tangent +
              " --out " + t1) == 0);
    CHECK(run("--quiet compute tensor --space " + space + " --mu " + nu + " --tangent " + tangent +
              " --out " + t2) == 0);
    CHECK(slurp(t1) == slurp(t2));
    auto tj = nlohmann::json::parse(slurp(t1));
    CHECK(tj["g"].get<double>() > 0.0);
    CHECK(tj["g_tilde"].get<double>() == doctest::Approx(tj["g"].get<double>()).epsilon(1e-9));
    CHECK(tj["lambda2"].get<double>() < tj["q_bound"].get<double>() + 1e-9);
}

TEST_CASE("cli figure csv carries parameters and the expected triangle gap") {
    const std::string dir = art("figs");
    CHECK(run("--quiet figures triangle --eps 1.0 --out " + dir) == 0);
    const std::string text = slurp(dir + "/triangle.csv");
    CHECK(text.rfind("# figure=triangle epsilon=1", 0) == 0);

    auto rows = csv_rows(text);
    REQUIRE(!rows.empty());
    double max_gap = -1.0, gap_at_one = -1.0;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 5);
        max_gap = std::max(max_gap, row[1]);
        if (std::abs(row[0] - 1.0) < 1e-12) gap_at_one = row[1];
    }
    const double expected = reference()["triangle"]["gap_normalized"].get<double>();
    CHECK(std::abs(gap_at_one - expected) < 1e-9);
    // The remark's cell sits at r = sqrt(eps); the family max over the scan is
    // slightly higher (about 0.0965 near r = 0.9 sqrt(eps)).
    CHECK(max_gap >= expected);
    CHECK(max_gap < 0.10);
}

TEST_CASE("cli geodesic output parses and converges") {
    const std::string space = art("g_space.json"), mu0 = art("g_mu0.json"), mu1 = art("g_mu1.json");
    sinkgeo::io::write_text_file(
        space,
        R"({"points": [[0.0], [0.25], [0.5], [0.75], [1.0]], "cost": "sqeuclidean", "epsilon": 1.0})");
    sinkgeo::io::write_text_file(mu0, R"({"weights": [0.4, 0.3, 0.15, 0.1, 0.05]})");
    sinkgeo::io::write_text_file(mu1, R"({"weights": [0.05, 0.1, 0.15, 0.3, 0.4]})");
    const std::string out = art("geodesic.json");
    CHECK(run("--quiet geodesic --space " + space + " --mu0 " + mu0 + " --mu1 " + mu1 +
              " --steps 4 --out " + out) == 0);
    auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["converged"].get<bool>());
    CHECK(j["times"].size() == 5);
    CHECK(j["weights"].size() == 5);
    CHECK(j["ds_estimate"].get<double>() > 0.0);
    CHECK(j["lower_bound"].get<double>() <= j["ds_estimate"].get<double>() + 1e-9);
}

TEST_CASE("cli bridge emits a density scan") {
    const std::string space = art("g_space.json"), mu0 = art("g_mu0.json"), mu1 = art("g_mu1.json");
    sinkgeo::io::write_text_file(
        space,
        R"({"points": [[0.0], [0.25], [0.5], [0.75], [1.0]], "cost": "sqeuclidean", "epsilon": 1.0})");
    sinkgeo::io::write_text_file(mu0, R"({"weights": [0.4, 0.3, 0.15, 0.1, 0.05]})");
    sinkgeo::io::write_text_file(mu1, R"({"weights": [0.05, 0.1, 0.15, 0.3, 0.4]})");
    const std::string out = art("bridge.csv");
    CHECK(run("--quiet bridge --space " + space + " --mu0 " + mu0 + " --mu1 " + mu1 +
              " --t 0.5 --grid -1.0:2.0:61 --out " + out) == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("# figure=bridge t=0.5", 0) == 0);
    auto rows = csv_rows(text);
    CHECK(rows.size() == 61);
    CHECK(rows.front().size() == 2);
}

TEST_CASE("cli exit codes distinguish failure classes") {
    CHECK(run("--quiet compute ot --space cli_test_artifacts/missing.json --mu x --nu y") == 3);

    const std::string broken = art("broken.json");
    sinkgeo::io::write_text_file(broken, "{\"epsilon\": ");
    CHECK(run("--quiet compute ot --space " + broken + " --mu x --nu y") == 4);

    CHECK(run("--quiet validate --suite nonsense") == 4);

    const std::string space = art("space.json"), mu = art("mu.json"), nu = art("nu.json");
    write_pair_inputs(space, mu, nu);
    CHECK(run("--quiet bridge --space " + space + " --mu0 " + mu + " --mu1 " + nu +
              " --t 0.5 --grid bad") == 4);
    // A Dirac-sided pair converges in one sweep, so starve a spread-out pair.
    const std::string spread = art("spread.json");
    sinkgeo::io::write_text_file(spread, R"({"weights": [0.2, 0.4, 0.4]})");
    CHECK(run("--quiet compute ot --space " + space + " --mu " + spread + " --nu " + nu +
              " --max-iter 1") == 5);
    CHECK(run("") == 4);
}
