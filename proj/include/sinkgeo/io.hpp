#pragma once

#include <string>

#include <json.hpp>

#include "sinkgeo/space.hpp"

namespace sinkgeo::io {

// Space file: {"points": [[x,...],...], "cost": "sqeuclidean" | [[...]], "epsilon": e}.
// "points" may be omitted when an explicit cost matrix is given.
GroundSpace load_space(const std::string& path);
GroundSpace space_from_json(const nlohmann::json& j);

// Measure file: {"points": [[x,...],...], "weights": [w,...]}. The points block
// is optional; when present it must match the space coordinates. Weights within
// 1e-6 of summing to 1 are normalized, anything further off is rejected.
Measure load_measure(const std::string& path, const GroundSpace& space);
Measure measure_from_json(const nlohmann::json& j, const GroundSpace& space);

// Tangent file: same layout as a measure but with signed weights summing to 0.
TangentVector load_tangent(const std::string& path, const GroundSpace& space);

nlohmann::json parse_file(const std::string& path);

// All numeric output goes through this: 17 significant digits, so that equal
// doubles always print identically and diffs of regenerated artifacts are
// meaningful.
std::string fmt17(double x);

void write_text_file(const std::string& path, const std::string& content);

namespace detail {

template <class J>
void dump17_rec(const J& j, std::string& out, int indent, int depth) {
    auto pad = [&](int d) {
        if (indent > 0) {
            out += '\n';
            out.append(static_cast<size_t>(indent * d), ' ');
        }
    };
    switch (j.type()) {
        case nlohmann::json::value_t::number_float:
            out += fmt17(j.template get<double>());
            break;
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                pad(depth + 1);
                out += nlohmann::json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                dump17_rec(it.value(), out, indent, depth + 1);
            }
            if (!first) pad(depth);
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                pad(depth + 1);
                dump17_rec(v, out, indent, depth + 1);
            }
            if (!first) pad(depth);
            out += ']';
            break;
        }
        default:
            out += j.dump();
    }
}

}  // namespace detail

// Serialize a json value with every floating-point number rendered by fmt17
// (nlohmann's own dump uses shortest-roundtrip formatting, which is not what
// the output contract asks for). Use ordered_json upstream to fix key order.
template <class J>
std::string dump17(const J& j, int indent = 0) {
    std::string out;
    detail::dump17_rec(j, out, indent, 0);
    if (indent > 0) out += '\n';
    return out;
}

}  // namespace sinkgeo::io
