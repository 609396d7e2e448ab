#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/data/factor.hpp"
#include "causeway/discovery/pc.hpp"
#include "causeway/graph/mixed_graph.hpp"

namespace causeway::explain {

using graph::MixedGraph;
using NameSet = std::set<std::string>;

/// Mechanism graph with required/confirmed arrows forced and forbidden
/// arrows removed. Throws ValidationError if the result has a directed cycle.
MixedGraph enforce_constraints(const MixedGraph& gw, const discovery::BackgroundKnowledge& constraints);

/// Union of all directed root -> boundary paths in the constrained mechanism
/// graph: the subgraph induced by the vertices that are reachable from a root
/// and reach some boundary vertex, keeping directed edges only. Boundary
/// vertices that no root reaches are kept isolated with a warning;
/// undirected edges are ignored for reachability and reported.
MixedGraph conn_min(const MixedGraph& gw, const NameSet& roots, const NameSet& boundary,
                    const discovery::BackgroundKnowledge& confirmed = {});

struct ExplanatorySubgraph {
    MixedGraph graph;
    std::string target;
    NameSet boundary;
    NameSet roots;
    /// The constrained mechanism graph E_Y was cut from, when known.
    std::optional<MixedGraph> source;
    bool degenerate = false;
    std::vector<std::string> notes;
};

/// E_Y = {Y} u boundary u conn. Boundary-Y adjacencies come from the local
/// graph; orientation preference is confirmed > local directed > mechanism,
/// and overridden sources are noted.
ExplanatorySubgraph assemble_e_y(const MixedGraph& conn, const NameSet& boundary, const std::string& target,
                                 const MixedGraph& local, const NameSet& roots,
                                 const discovery::BackgroundKnowledge& confirmed = {});

struct MinimalityReport {
    bool pass = true;
    std::vector<std::string> violations;
};

/// Every non-terminal vertex and every edge other than a boundary-target
/// interface edge must lie on a directed root -> boundary path inside E_Y.
/// With a source graph, edges must also exist there and every source edge on
/// such a path must be retained.
MinimalityReport verify_minimality(const ExplanatorySubgraph& e);

/// Lifts every edge U-V to supp(U) x supp(V) keeping the end marks. Self-loops
/// are dropped; repeated lifts of one pair merge, and disagreeing end marks
/// merge to a circle. Vertices without a support entry are their own support,
/// except constructed vertices, which raise ValidationError.
MixedGraph project(const MixedGraph& g, const data::SupportSet& supports);

nlohmann::json to_json(const ExplanatorySubgraph& e);

}  // namespace causeway::explain
