#include "causeway/graph/serialize.hpp"

#include <sstream>

#include "causeway/common.hpp"

namespace causeway::graph {

using nlohmann::json;

json to_json(const MixedGraph& g) {
    json vertices = json::array();
    for (const auto& v : g.vertices()) {
        json jv = {{"name", v.name}, {"scale", to_string(v.scale)}, {"kind", to_string(v.kind)}};
        if (v.kind == VertexKind::constructed) jv["factor"] = v.factor;
        vertices.push_back(std::move(jv));
    }
    json edges = json::array();
    for (const auto& e : g.edges())
        edges.push_back({{"a", e.a}, {"b", e.b}, {"mark_a", to_string(e.mark_a)}, {"mark_b", to_string(e.mark_b)}});
    return {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

namespace {

const std::string& string_field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ValidationError(path + ": expected object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path + "/" + key + ": missing required field");
    if (!it->is_string()) throw ValidationError(path + "/" + key + ": expected string");
    return it->get_ref<const std::string&>();
}

}  // namespace

MixedGraph from_json(const json& j) {
    if (!j.is_object()) throw ValidationError(": expected object");
    if (!j.contains("vertices") || !j["vertices"].is_array())
        throw ValidationError("/vertices: expected array");
    MixedGraph g;
    const auto& vertices = j["vertices"];
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const std::string path = "/vertices/" + std::to_string(i);
        const auto& jv = vertices[i];
        Vertex v;
        v.name = string_field(jv, "name", path);
        if (jv.contains("scale")) {
            auto scale = parse_scale(string_field(jv, "scale", path));
            if (!scale) throw ValidationError(path + "/scale: unknown scale '" + jv["scale"].get<std::string>() + "'");
            v.scale = *scale;
        }
        if (jv.contains("kind")) {
            auto kind = parse_kind(string_field(jv, "kind", path));
            if (!kind) throw ValidationError(path + "/kind: unknown kind '" + jv["kind"].get<std::string>() + "'");
            v.kind = *kind;
        }
        if (jv.contains("factor")) v.factor = string_field(jv, "factor", path);
        if (g.has_vertex(v.name)) throw ValidationError(path + "/name: duplicate vertex '" + v.name + "'");
        g.add_vertex(std::move(v));
    }
    if (j.contains("edges")) {
        const auto& edges = j["edges"];
        if (!edges.is_array()) throw ValidationError("/edges: expected array");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const std::string path = "/edges/" + std::to_string(i);
            const auto& je = edges[i];
            const auto& a = string_field(je, "a", path);
            const auto& b = string_field(je, "b", path);
            const auto& ma = string_field(je, "mark_a", path);
            const auto& mb = string_field(je, "mark_b", path);
            auto mark_a = parse_mark(ma);
            if (!mark_a) throw ValidationError(path + "/mark_a: unknown mark '" + ma + "'");
            auto mark_b = parse_mark(mb);
            if (!mark_b) throw ValidationError(path + "/mark_b: unknown mark '" + mb + "'");
            if (!g.has_vertex(a)) throw ValidationError(path + "/a: unknown vertex '" + a + "'");
            if (!g.has_vertex(b)) throw ValidationError(path + "/b: unknown vertex '" + b + "'");
            if (a == b) throw ValidationError(path + ": self-loop on '" + a + "'");
            if (g.adjacent(a, b)) throw ValidationError(path + ": duplicate edge " + a + " - " + b);
            g.set_edge(a, b, *mark_a, *mark_b);
        }
    }
    return g;
}

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string to_dot(const MixedGraph& g, const DotStyle& style) {
    std::ostringstream os;
    os << "digraph " << quoted(style.graph_name) << " {\n";
    for (const auto& v : g.vertices()) {
        os << "  " << quoted(v.name);
        std::vector<std::string> attrs;
        if (v.name == style.target) attrs.emplace_back("shape=box");
        if (style.highlighted.contains(v.name)) attrs.emplace_back("peripheries=2");
        if (v.kind == VertexKind::constructed) attrs.emplace_back("style=dashed");
        if (!attrs.empty()) {
            os << " [";
            for (std::size_t i = 0; i < attrs.size(); ++i) os << (i ? ", " : "") << attrs[i];
            os << "]";
        }
        os << ";\n";
    }
    for (const auto& e : g.edges()) {
        if (e.directed()) {
            os << "  " << quoted(e.source()) << " -> " << quoted(e.target()) << ";\n";
        } else if (e.undirected()) {
            os << "  " << quoted(e.a) << " -> " << quoted(e.b) << " [dir=none];\n";
        } else {
            auto head = [](Mark m) {
                switch (m) {
                    case Mark::tail: return "none";
                    case Mark::arrow: return "normal";
                    case Mark::circle: return "odot";
                }
                return "none";
            };
            os << "  " << quoted(e.a) << " -> " << quoted(e.b) << " [dir=both, arrowtail=" << head(e.mark_a)
               << ", arrowhead=" << head(e.mark_b) << "];\n";
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace causeway::graph
