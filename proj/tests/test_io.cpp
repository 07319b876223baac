#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "sinkgeo/io.hpp"
#include "test_helpers.hpp"

using namespace sinkgeo;

namespace {

// Scratch directory next to the test binary's working directory.
std::string scratch(const std::string& name) {
    std::filesystem::create_directories("io_test_artifacts");
    return (std::filesystem::path("io_test_artifacts") / name).string();
}

}  // namespace

TEST_CASE("space round trip through json files") {
    const std::string path = scratch("space.json");
    io::write_text_file(path,
                        R"({"points": [[0.0], [1.0], [2.5]], "cost": "sqeuclidean", "epsilon": 0.75})");
    GroundSpace space = io::load_space(path);
    CHECK(space.size() == 3);
    CHECK(space.epsilon() == 0.75);
    CHECK(space.sqeuclidean_cost());
    CHECK(space.cost()(0, 2) == doctest::Approx(6.25));

    const std::string explicit_path = scratch("space_cost.json");
    io::write_text_file(explicit_path, R"({"cost": [[0, 2], [2, 0]], "epsilon": 1.5})");
    GroundSpace from_cost = io::load_space(explicit_path);
    CHECK(from_cost.size() == 2);
    CHECK_FALSE(from_cost.has_points());
    CHECK(from_cost.cost()(0, 1) == 2.0);
}

TEST_CASE("measure and tangent loading") {
    const std::string space_path = scratch("m_space.json");
    io::write_text_file(space_path,
                        R"({"points": [[0.0], [1.0]], "cost": "sqeuclidean", "epsilon": 1.0})");
    GroundSpace space = io::load_space(space_path);

    const std::string mu_path = scratch("mu.json");
    io::write_text_file(mu_path, R"({"weights": [0.25, 0.75]})");
    Measure mu = io::load_measure(mu_path, space);
    CHECK(mu[0] == 0.25);

    // Slightly off-normalized weights are rescaled; far-off ones are rejected.
    const std::string near_path = scratch("mu_near.json");
    io::write_text_file(near_path, R"({"weights": [0.25, 0.7500000002]})");
    Measure near = io::load_measure(near_path, space);
    CHECK(near.weights().sum() == doctest::Approx(1.0).epsilon(1e-15));

    const std::string far_path = scratch("mu_far.json");
    io::write_text_file(far_path, R"({"weights": [0.25, 0.80]})");
    CHECK_THROWS_AS(io::load_measure(far_path, space), InvalidInput);

    const std::string b_path = scratch("b.json");
    io::write_text_file(b_path, R"({"weights": [0.1, -0.1]})");
    TangentVector b = io::load_tangent(b_path, space);
    CHECK(b.weights()[1] == -0.1);

    const std::string unbalanced_path = scratch("b_bad.json");
    io::write_text_file(unbalanced_path, R"({"weights": [0.1, -0.2]})");
    CHECK_THROWS_AS(io::load_tangent(unbalanced_path, space), UnbalancedTangent);
}

TEST_CASE("io failure modes") {
    CHECK_THROWS_AS(io::load_space("io_test_artifacts/does_not_exist.json"), IOError);

    const std::string broken = scratch("broken.json");
    io::write_text_file(broken, "{\"epsilon\": 1.0");
    CHECK_THROWS_AS(io::parse_file(broken), ParseError);

    const std::string wrong_shape = scratch("wrong_shape.json");
    io::write_text_file(wrong_shape, R"({"cost": "sqeuclidean", "epsilon": 1.0})");
    CHECK_THROWS_AS(io::load_space(wrong_shape), ParseError);
}

TEST_CASE("fmt17 round trips doubles exactly") {
    for (double x : {0.1, 1.0 / 3.0, 3.141592653589793, 1e-300, 12345.678901234567, -0.0, 2e17}) {
        CHECK(std::stod(io::fmt17(x)) == x);
    }
    CHECK(io::fmt17(0.1) == "0.10000000000000001");
    CHECK(io::fmt17(1.0) == "1");
}

TEST_CASE("dump17 renders floats at full precision") {
    nlohmann::ordered_json j;
    j["value"] = 0.1;
    j["list"] = {1.0 / 3.0, 2.0};
    const std::string compact = io::dump17(j);
    CHECK(compact == R"({"value":0.10000000000000001,"list":[0.33333333333333331,2]})");
    const std::string indented = io::dump17(j, 2);
    CHECK(indented.find("\n  \"value\": 0.10000000000000001") != std::string::npos);
    CHECK(indented.back() == '\n');
}
