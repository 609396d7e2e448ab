#include "causeway/graph/algorithms.hpp"

#include <deque>
#include <map>

#include "causeway/common.hpp"

namespace causeway::graph {

namespace {

using Adjacency = std::map<std::string, std::vector<std::string>>;

Adjacency directed_adjacency(const MixedGraph& g, bool reversed) {
    Adjacency adj;
    for (const auto& v : g.vertices()) adj[v.name];
    for (const auto& e : g.edges()) {
        if (!e.directed()) continue;
        if (reversed)
            adj[e.target()].push_back(e.source());
        else
            adj[e.source()].push_back(e.target());
    }
    return adj;
}

NameSet bfs(const Adjacency& adj, const NameSet& start) {
    NameSet seen = start;
    std::deque<std::string> queue(start.begin(), start.end());
    while (!queue.empty()) {
        const std::string v = queue.front();
        queue.pop_front();
        for (const auto& w : adj.at(v))
            if (seen.insert(w).second) queue.push_back(w);
    }
    return seen;
}

void require_all(const MixedGraph& g, const NameSet& names) {
    for (const auto& n : names)
        if (!g.has_vertex(n)) throw ValidationError("unknown vertex '" + n + "'");
}

}  // namespace

PairSet skeleton(const MixedGraph& g) {
    PairSet out;
    for (const auto& e : g.edges()) out.insert({e.a, e.b});
    return out;
}

PairSet transitive_closure(const MixedGraph& g) {
    const auto adj = directed_adjacency(g, false);
    PairSet out;
    for (const auto& [v, _] : adj) {
        for (const auto& w : bfs(adj, {v}))
            if (w != v) out.insert({v, w});
    }
    // A vertex on a directed cycle reaches itself.
    for (const auto& [v, succ] : adj) {
        for (const auto& w : succ) {
            if (w == v || out.contains({w, v})) out.insert({v, v});
        }
    }
    return out;
}

NameSet reach_forward(const MixedGraph& g, const NameSet& sources) {
    require_all(g, sources);
    return bfs(directed_adjacency(g, false), sources);
}

NameSet reach_backward(const MixedGraph& g, const NameSet& sinks) {
    require_all(g, sinks);
    return bfs(directed_adjacency(g, true), sinks);
}

bool is_acyclic(const MixedGraph& g) {
    // Kahn's algorithm on the directed part.
    std::map<std::string, int> indegree;
    const auto adj = directed_adjacency(g, false);
    for (const auto& [v, _] : adj) indegree[v];
    for (const auto& [v, succ] : adj)
        for (const auto& w : succ) ++indegree[w];
    std::deque<std::string> ready;
    for (const auto& [v, d] : indegree)
        if (d == 0) ready.push_back(v);
    std::size_t removed = 0;
    while (!ready.empty()) {
        const std::string v = ready.front();
        ready.pop_front();
        ++removed;
        for (const auto& w : adj.at(v))
            if (--indegree[w] == 0) ready.push_back(w);
    }
    return removed == adj.size();
}

bool creates_cycle(const MixedGraph& g, const std::string& from, const std::string& to) {
    if (from == to) return true;
    return reach_forward(g, {to}).contains(from);
}

MixedGraph directed_part(const MixedGraph& g) {
    MixedGraph out;
    for (const auto& v : g.vertices()) out.add_vertex(v);
    for (const auto& e : g.edges())
        if (e.directed()) out.add_directed(e.source(), e.target());
    return out;
}

}  // namespace causeway::graph
