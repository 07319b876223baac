#include "sinkgeo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sinkgeo::io {

namespace {

Matrix matrix_from_json(const nlohmann::json& rows, const char* what) {
    if (!rows.is_array() || rows.empty()) {
        throw ParseError(std::string(what) + " must be a nonempty array of rows");
    }
    const size_t n = rows.size();
    size_t d = 0;
    Matrix out;
    for (size_t i = 0; i < n; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.empty()) {
            throw ParseError(std::string(what) + ": row " + std::to_string(i) + " is not an array");
        }
        if (i == 0) {
            d = row.size();
            out.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        } else if (row.size() != d) {
            throw ParseError(std::string(what) + ": ragged rows");
        }
        for (size_t j = 0; j < d; ++j) {
            if (!row[j].is_number()) {
                throw ParseError(std::string(what) + ": non-numeric entry");
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
        }
    }
    return out;
}

Vector weights_from_json(const nlohmann::json& j) {
    if (!j.contains("weights") || !j["weights"].is_array()) {
        throw ParseError("expected a \"weights\" array");
    }
    const auto& w = j["weights"];
    Vector out(static_cast<Eigen::Index>(w.size()));
    for (size_t i = 0; i < w.size(); ++i) {
        if (!w[i].is_number()) throw ParseError("weights: non-numeric entry");
        out[static_cast<Eigen::Index>(i)] = w[i].get<double>();
    }
    return out;
}

void check_points_match(const nlohmann::json& j, const GroundSpace& space) {
    if (!j.contains("points")) return;
    Matrix pts = matrix_from_json(j["points"], "points");
    if (!space.has_points()) {
        throw InvalidInput("measure lists points but the space has none");
    }
    if (pts.rows() != space.points().rows() || pts.cols() != space.points().cols() ||
        (pts - space.points()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidInput("measure points do not match the space points");
    }
}

}  // namespace

nlohmann::json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

GroundSpace space_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("space: expected a JSON object");
    if (!j.contains("epsilon") || !j["epsilon"].is_number()) {
        throw ParseError("space: missing numeric \"epsilon\"");
    }
    const double eps = j["epsilon"].get<double>();
    const nlohmann::json cost = j.value("cost", nlohmann::json("sqeuclidean"));
    if (cost.is_string() && cost.get<std::string>() == "sqeuclidean") {
        if (!j.contains("points")) throw ParseError("space: sqeuclidean cost needs \"points\"");
        return GroundSpace::sqeuclidean(matrix_from_json(j["points"], "points"), eps);
    }
    if (cost.is_array()) {
        Matrix c = matrix_from_json(cost, "cost");
        std::optional<Matrix> pts;
        if (j.contains("points")) pts = matrix_from_json(j["points"], "points");
        return GroundSpace::explicit_cost(std::move(c), eps, std::move(pts));
    }
    throw ParseError("space: \"cost\" must be \"sqeuclidean\" or a matrix");
}

GroundSpace load_space(const std::string& path) {
    return space_from_json(parse_file(path));
}

Measure measure_from_json(const nlohmann::json& j, const GroundSpace& space) {
    if (!j.is_object()) throw ParseError("measure: expected a JSON object");
    check_points_match(j, space);
    Vector w = weights_from_json(j);
    if (w.size() != space.size()) {
        throw InvalidInput("measure has " + std::to_string(w.size()) + " weights on a space of size " +
                           std::to_string(space.size()));
    }
    const double sum = w.sum();
    if (std::abs(sum - 1.0) > 1e-6) {
        throw InvalidInput("measure weights sum to " + std::to_string(sum) + ", not 1");
    }
    w /= sum;
    return Measure(space, std::move(w));
}

Measure load_measure(const std::string& path, const GroundSpace& space) {
    return measure_from_json(parse_file(path), space);
}

TangentVector load_tangent(const std::string& path, const GroundSpace& space) {
    nlohmann::json j = parse_file(path);
    if (!j.is_object()) throw ParseError("tangent: expected a JSON object");
    check_points_match(j, space);
    Vector w = weights_from_json(j);
    if (w.size() != space.size()) throw InvalidInput("tangent length does not match space size");
    return TangentVector(space, std::move(w));
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IOError("failed writing " + path);
}

}  // namespace sinkgeo::io
