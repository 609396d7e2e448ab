#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace causeway::graph {

enum class Mark { tail, arrow, circle };
enum class Scale { micro, meso, macro, unknown };
enum class VertexKind { observed, constructed, hypothesis };

const char* to_string(Mark mark);
const char* to_string(Scale scale);
const char* to_string(VertexKind kind);
std::optional<Mark> parse_mark(std::string_view text);
std::optional<Scale> parse_scale(std::string_view text);
std::optional<VertexKind> parse_kind(std::string_view text);

struct Vertex {
    std::string name;
    Scale scale = Scale::unknown;
    VertexKind kind = VertexKind::observed;
    /// Name of the FactorSpec backing a constructed vertex; empty otherwise.
    std::string factor;

    friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// An edge seen from a fixed endpoint order. `mark_a` sits at `a`.
struct Edge {
    std::string a;
    std::string b;
    Mark mark_a = Mark::tail;
    Mark mark_b = Mark::arrow;

    bool directed() const {
        return (mark_a == Mark::tail && mark_b == Mark::arrow) ||
               (mark_a == Mark::arrow && mark_b == Mark::tail);
    }
    bool undirected() const { return mark_a == Mark::tail && mark_b == Mark::tail; }
    /// Source of a directed edge. Only meaningful when directed().
    const std::string& source() const { return mark_a == Mark::tail ? a : b; }
    const std::string& target() const { return mark_a == Mark::tail ? b : a; }

    friend bool operator==(const Edge&, const Edge&) = default;
};

using NamePair = std::pair<std::string, std::string>;

/// Ordered pair (u, v) with u < v lexicographically.
NamePair unordered_key(const std::string& u, const std::string& v);

/// Vertices plus at most one edge per unordered pair, each edge carrying a
/// mark at both endpoints. DAGs, CPDAGs and PAGs share this representation:
/// (tail, arrow) is directed, (tail, tail) undirected, circles mark endpoints
/// left unresolved.
///
/// Edges are stored keyed by the lexicographically ordered pair so that
/// iteration and serialization order are deterministic.
class MixedGraph {
public:
    MixedGraph() = default;
    explicit MixedGraph(const std::vector<std::string>& names);

    /// Throws ValidationError on a duplicate name.
    void add_vertex(Vertex vertex);
    void add_vertex(const std::string& name) { add_vertex(Vertex{name, Scale::unknown, VertexKind::observed, {}}); }
    /// Adds the vertex if missing; no-op otherwise.
    void ensure_vertex(const std::string& name);
    bool has_vertex(const std::string& name) const { return index_.contains(name); }
    const Vertex& vertex(const std::string& name) const;
    const std::vector<Vertex>& vertices() const { return vertices_; }
    std::vector<std::string> names() const;
    std::size_t size() const { return vertices_.size(); }

    /// Sets (or replaces) the edge between u and v. Throws ValidationError
    /// for self-loops and unknown vertices.
    void set_edge(const std::string& u, const std::string& v, Mark mark_at_u, Mark mark_at_v);
    void add_directed(const std::string& from, const std::string& to) {
        set_edge(from, to, Mark::tail, Mark::arrow);
    }
    void add_undirected(const std::string& u, const std::string& v) {
        set_edge(u, v, Mark::tail, Mark::tail);
    }
    bool remove_edge(const std::string& u, const std::string& v);

    bool adjacent(const std::string& u, const std::string& v) const;
    /// Marks as (mark at u, mark at v), or nullopt when not adjacent.
    std::optional<std::pair<Mark, Mark>> marks(const std::string& u, const std::string& v) const;
    bool has_directed(const std::string& from, const std::string& to) const;
    bool has_undirected(const std::string& u, const std::string& v) const;

    std::vector<Edge> edges() const;
    std::size_t edge_count() const { return edges_.size(); }

    std::vector<std::string> neighbors(const std::string& v) const;
    std::vector<std::string> parents(const std::string& v) const;
    std::vector<std::string> children(const std::string& v) const;

    /// Induced subgraph on the given vertex names (unknown names ignored).
    MixedGraph induced(const std::set<std::string>& keep) const;

    friend bool operator==(const MixedGraph& lhs, const MixedGraph& rhs);

private:
    void require_vertex(const std::string& name) const;

    std::vector<Vertex> vertices_;
    std::unordered_map<std::string, std::size_t> index_;
    std::map<NamePair, std::pair<Mark, Mark>> edges_;
};

}  // namespace causeway::graph
