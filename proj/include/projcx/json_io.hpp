#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ext_dist.hpp"
#include "system.hpp"

namespace projcx {

/// Raised on malformed input documents (bad JSON, wrong schema, missing or
/// ill-typed fields).  The CLI maps this to the usage-error exit code.
class JsonLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string read_all(std::istream& in) {
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw JsonLoadError(origin + ": " + e.what());
    }
}

namespace detail {

inline const nlohmann::json& need(const nlohmann::json& j, const std::string& key, const std::string& ctx) {
    if (!j.is_object()) throw JsonLoadError(ctx + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw JsonLoadError(ctx + ": missing field '" + key + "'");
    return *it;
}

inline std::int64_t need_int(const nlohmann::json& j, const std::string& key, const std::string& ctx) {
    const auto& v = need(j, key, ctx);
    if (!v.is_number_integer()) throw JsonLoadError(ctx + ": field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

inline const nlohmann::json& need_array(const nlohmann::json& j, const std::string& key, const std::string& ctx) {
    const auto& v = need(j, key, ctx);
    if (!v.is_array()) throw JsonLoadError(ctx + ": field '" + key + "' must be an array");
    return v;
}

inline void need_schema(const nlohmann::json& j, const std::string& expected, const std::string& ctx) {
    const auto& v = need(j, "schema", ctx);
    if (!v.is_string() || v.get<std::string>() != expected)
        throw JsonLoadError(ctx + ": expected schema '" + expected + "'");
}

inline std::vector<std::int64_t> int_list(const nlohmann::json& arr, const std::string& ctx) {
    std::vector<std::int64_t> out;
    for (const auto& v : arr) {
        if (!v.is_number_integer()) throw JsonLoadError(ctx + ": expected integers");
        out.push_back(v.get<std::int64_t>());
    }
    return out;
}

inline std::vector<std::pair<std::int64_t, std::int64_t>> pair_list(const nlohmann::json& arr,
                                                                    const std::string& ctx) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (const auto& v : arr) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
            throw JsonLoadError(ctx + ": expected two-element integer arrays");
        out.emplace_back(v[0].get<std::int64_t>(), v[1].get<std::int64_t>());
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------- systems

inline nlohmann::json system_to_json(const ProjectionSystem& sys) {
    nlohmann::json j;
    j["schema"] = "projcx-system-v1";
    j["theta"] = sys.theta();
    nlohmann::json spaces = nlohmann::json::array();
    for (SpaceId id : sys.space_ids()) {
        const auto& g = sys.space(id);
        nlohmann::json s;
        s["id"] = id;
        s["vertices"] = g.vertex_ids();
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& [a, b] : g.edge_list()) edges.push_back({a, b});
        s["edges"] = edges;
        spaces.push_back(s);
    }
    j["spaces"] = spaces;
    nlohmann::json projections = nlohmann::json::array();
    for (SpaceId target : sys.space_ids())
        for (SpaceId source : sys.space_ids()) {
            if (target == source) continue;
            nlohmann::json p;
            p["target"] = target;
            p["source"] = source;
            p["vertices"] = sys.proj(target, source);
            projections.push_back(p);
        }
    j["projections"] = projections;
    return j;
}

inline ProjectionSystem system_from_json(const nlohmann::json& j) {
    const std::string ctx = "system document";
    detail::need_schema(j, "projcx-system-v1", ctx);
    ProjectionSystemBuilder b;
    try {
        b.set_theta(detail::need_int(j, "theta", ctx));
        for (const auto& s : detail::need_array(j, "spaces", ctx)) {
            SpaceId id = detail::need_int(s, "id", "space");
            auto vertices = detail::int_list(detail::need_array(s, "vertices", "space"), "space vertices");
            auto edges = detail::pair_list(detail::need_array(s, "edges", "space"), "space edges");
            b.add_space(id, std::move(vertices), std::move(edges));
        }
        for (const auto& p : detail::need_array(j, "projections", ctx)) {
            SpaceId target = detail::need_int(p, "target", "projection");
            SpaceId source = detail::need_int(p, "source", "projection");
            auto vertices = detail::int_list(detail::need_array(p, "vertices", "projection"), "projection vertices");
            b.set_projection(target, source, std::move(vertices));
        }
        return b.finalize();
    } catch (const std::invalid_argument& e) {
        throw JsonLoadError(ctx + ": " + e.what());
    }
}

inline nlohmann::json abstract_to_json(const AbstractDistanceSystem& sys) {
    nlohmann::json j;
    j["schema"] = "projcx-abstract-v1";
    j["theta"] = sys.theta();
    j["spaces"] = sys.space_ids();
    const DistanceView& v = sys.distances();
    nlohmann::json distances = nlohmann::json::array();
    int n = v.n();
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            for (int z = x; z < n; ++z) {
                auto e = v.try_d_idx(y, x, z);
                if (!e) continue;
                nlohmann::json row;
                row["at"] = v.id_at(y);
                row["a"] = v.id_at(x);
                row["b"] = v.id_at(z);
                if (e->is_infinite())
                    row["inf"] = true;
                else
                    row["value"] = e->value();
                distances.push_back(row);
            }
    j["distances"] = distances;
    return j;
}

inline AbstractDistanceSystem abstract_from_json(const nlohmann::json& j) {
    const std::string ctx = "abstract document";
    detail::need_schema(j, "projcx-abstract-v1", ctx);
    std::int64_t theta = detail::need_int(j, "theta", ctx);
    auto ids = detail::int_list(detail::need_array(j, "spaces", ctx), "spaces");
    std::vector<AbstractEntry> entries;
    for (const auto& e : detail::need_array(j, "distances", ctx)) {
        AbstractEntry entry;
        entry.at = detail::need_int(e, "at", "distance entry");
        entry.a = detail::need_int(e, "a", "distance entry");
        entry.b = detail::need_int(e, "b", "distance entry");
        bool has_value = e.is_object() && e.contains("value");
        bool has_inf = e.is_object() && e.contains("inf") && e["inf"].is_boolean() && e["inf"].get<bool>();
        if (has_value == has_inf)
            throw JsonLoadError("distance entry: exactly one of 'value' or 'inf': true is required");
        if (has_value) {
            if (!e["value"].is_number_integer() || e["value"].get<std::int64_t>() < 0)
                throw JsonLoadError("distance entry: 'value' must be a non-negative integer");
            entry.value = ExtDist(e["value"].get<std::int64_t>());
        } else {
            entry.value = ExtDist::infinity();
        }
        entries.push_back(entry);
    }
    try {
        return AbstractDistanceSystem(std::move(ids), entries, theta);
    } catch (const std::invalid_argument& e) {
        throw JsonLoadError(ctx + ": " + e.what());
    }
}

/// Either kind of input document, dispatched on the schema field.
struct AnySystem {
    std::optional<ProjectionSystem> graph;
    std::optional<AbstractDistanceSystem> table;

    bool graph_backed() const { return graph.has_value(); }

    const DistanceView& distances() const { return graph ? graph->distances() : table->distances(); }

    std::int64_t theta() const { return distances().declared_theta(); }
};

inline AnySystem any_system_from_json(const nlohmann::json& j) {
    const auto& schema = detail::need(j, "schema", "input document");
    if (!schema.is_string()) throw JsonLoadError("input document: 'schema' must be a string");
    std::string s = schema.get<std::string>();
    AnySystem out;
    if (s == "projcx-system-v1") {
        out.graph = system_from_json(j);
    } else if (s == "projcx-abstract-v1") {
        out.table = abstract_from_json(j);
    } else {
        throw JsonLoadError("input document: unknown schema '" + s + "'");
    }
    return out;
}

}  // namespace projcx
