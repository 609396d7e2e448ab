#include "causeway/graph/mixed_graph.hpp"

#include <algorithm>

#include "causeway/common.hpp"

namespace causeway::graph {

const char* to_string(Mark mark) {
    switch (mark) {
        case Mark::tail: return "tail";
        case Mark::arrow: return "arrow";
        case Mark::circle: return "circle";
    }
    return "?";
}

const char* to_string(Scale scale) {
    switch (scale) {
        case Scale::micro: return "micro";
        case Scale::meso: return "meso";
        case Scale::macro: return "macro";
        case Scale::unknown: return "unknown";
    }
    return "?";
}

const char* to_string(VertexKind kind) {
    switch (kind) {
        case VertexKind::observed: return "observed";
        case VertexKind::constructed: return "constructed";
        case VertexKind::hypothesis: return "hypothesis";
    }
    return "?";
}

std::optional<Mark> parse_mark(std::string_view text) {
    if (text == "tail") return Mark::tail;
    if (text == "arrow") return Mark::arrow;
    if (text == "circle") return Mark::circle;
    return std::nullopt;
}

std::optional<Scale> parse_scale(std::string_view text) {
    if (text == "micro") return Scale::micro;
    if (text == "meso") return Scale::meso;
    if (text == "macro") return Scale::macro;
    if (text == "unknown") return Scale::unknown;
    return std::nullopt;
}

std::optional<VertexKind> parse_kind(std::string_view text) {
    if (text == "observed") return VertexKind::observed;
    if (text == "constructed") return VertexKind::constructed;
    if (text == "hypothesis") return VertexKind::hypothesis;
    return std::nullopt;
}

NamePair unordered_key(const std::string& u, const std::string& v) {
    return u < v ? NamePair{u, v} : NamePair{v, u};
}

MixedGraph::MixedGraph(const std::vector<std::string>& names) {
    for (const auto& name : names) add_vertex(name);
}

void MixedGraph::add_vertex(Vertex vertex) {
    if (vertex.name.empty()) throw ValidationError("vertex name must be nonempty");
    if (index_.contains(vertex.name)) throw ValidationError("duplicate vertex '" + vertex.name + "'");
    if (vertex.kind == VertexKind::constructed && vertex.factor.empty()) vertex.factor = vertex.name;
    index_.emplace(vertex.name, vertices_.size());
    vertices_.push_back(std::move(vertex));
}

void MixedGraph::ensure_vertex(const std::string& name) {
    if (!has_vertex(name)) add_vertex(name);
}

const Vertex& MixedGraph::vertex(const std::string& name) const {
    require_vertex(name);
    return vertices_[index_.at(name)];
}

std::vector<std::string> MixedGraph::names() const {
    std::vector<std::string> out;
    out.reserve(vertices_.size());
    for (const auto& v : vertices_) out.push_back(v.name);
    return out;
}

void MixedGraph::require_vertex(const std::string& name) const {
    if (!index_.contains(name)) throw ValidationError("unknown vertex '" + name + "'");
}

void MixedGraph::set_edge(const std::string& u, const std::string& v, Mark mark_at_u, Mark mark_at_v) {
    require_vertex(u);
    require_vertex(v);
    if (u == v) throw ValidationError("self-loop on '" + u + "'");
    if (u < v)
        edges_[{u, v}] = {mark_at_u, mark_at_v};
    else
        edges_[{v, u}] = {mark_at_v, mark_at_u};
}

bool MixedGraph::remove_edge(const std::string& u, const std::string& v) {
    return edges_.erase(unordered_key(u, v)) > 0;
}

bool MixedGraph::adjacent(const std::string& u, const std::string& v) const {
    return edges_.contains(unordered_key(u, v));
}

std::optional<std::pair<Mark, Mark>> MixedGraph::marks(const std::string& u, const std::string& v) const {
    auto it = edges_.find(unordered_key(u, v));
    if (it == edges_.end()) return std::nullopt;
    if (u < v) return it->second;
    return std::pair{it->second.second, it->second.first};
}

bool MixedGraph::has_directed(const std::string& from, const std::string& to) const {
    auto m = marks(from, to);
    return m && m->first == Mark::tail && m->second == Mark::arrow;
}

bool MixedGraph::has_undirected(const std::string& u, const std::string& v) const {
    auto m = marks(u, v);
    return m && m->first == Mark::tail && m->second == Mark::tail;
}

std::vector<Edge> MixedGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edges_.size());
    for (const auto& [key, m] : edges_) out.push_back(Edge{key.first, key.second, m.first, m.second});
    return out;
}

std::vector<std::string> MixedGraph::neighbors(const std::string& v) const {
    require_vertex(v);
    std::vector<std::string> out;
    for (const auto& [key, m] : edges_) {
        if (key.first == v) out.push_back(key.second);
        else if (key.second == v) out.push_back(key.first);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> MixedGraph::parents(const std::string& v) const {
    std::vector<std::string> out;
    for (const auto& n : neighbors(v))
        if (has_directed(n, v)) out.push_back(n);
    return out;
}

std::vector<std::string> MixedGraph::children(const std::string& v) const {
    std::vector<std::string> out;
    for (const auto& n : neighbors(v))
        if (has_directed(v, n)) out.push_back(n);
    return out;
}

MixedGraph MixedGraph::induced(const std::set<std::string>& keep) const {
    MixedGraph out;
    for (const auto& v : vertices_)
        if (keep.contains(v.name)) out.add_vertex(v);
    for (const auto& [key, m] : edges_)
        if (keep.contains(key.first) && keep.contains(key.second)) out.edges_[key] = m;
    return out;
}

bool operator==(const MixedGraph& lhs, const MixedGraph& rhs) {
    if (lhs.edges_ != rhs.edges_) return false;
    if (lhs.vertices_.size() != rhs.vertices_.size()) return false;
    for (const auto& v : lhs.vertices_) {
        auto it = rhs.index_.find(v.name);
        if (it == rhs.index_.end() || !(rhs.vertices_[it->second] == v)) return false;
    }
    return true;
}

}  // namespace causeway::graph
