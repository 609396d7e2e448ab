#pragma once

#include <string>

#include <json.hpp>

#include "causeway/graph/algorithms.hpp"
#include "causeway/graph/mixed_graph.hpp"

namespace causeway::graph {

nlohmann::json to_json(const MixedGraph& g);
/// Throws ValidationError naming the offending field (JSON pointer style).
MixedGraph from_json(const nlohmann::json& j);

struct DotStyle {
    std::string graph_name = "G";
    /// Vertices drawn with a double border (used for boundary vertices).
    NameSet highlighted;
    /// Vertex drawn as a box (used for the target).
    std::string target;
};

/// Directed edges render as `a -> b`; undirected as `a -> b [dir=none]`;
/// circle marks as `dir=both` with `odot` heads on the circled ends.
std::string to_dot(const MixedGraph& g, const DotStyle& style = {});

}  // namespace causeway::graph
