#pragma once

#include <set>
#include <string>

#include "causeway/graph/mixed_graph.hpp"

namespace causeway::graph {

using NameSet = std::set<std::string>;
using PairSet = std::set<NamePair>;

/// Unordered adjacencies {u, v} (stored as ordered u < v), marks ignored.
PairSet skeleton(const MixedGraph& g);

/// Ordered pairs (u, v) joined by a directed path. Only fully directed edges
/// contribute.
PairSet transitive_closure(const MixedGraph& g);

/// Sources plus everything reachable along directed edges. Throws
/// ValidationError for unknown names.
NameSet reach_forward(const MixedGraph& g, const NameSet& sources);
/// Sinks plus everything that reaches a sink along directed edges.
NameSet reach_backward(const MixedGraph& g, const NameSet& sinks);

/// True iff the fully directed part has no cycle.
bool is_acyclic(const MixedGraph& g);

/// True iff adding from -> to to the directed part would close a cycle.
bool creates_cycle(const MixedGraph& g, const std::string& from, const std::string& to);

/// Directed-only copy: undirected and circle-marked edges are dropped.
MixedGraph directed_part(const MixedGraph& g);

}  // namespace causeway::graph
