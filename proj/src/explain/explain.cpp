#include "causeway/explain/explain.hpp"

#include <map>

#include "causeway/common.hpp"
#include "causeway/graph/algorithms.hpp"
#include "causeway/graph/serialize.hpp"

namespace causeway::explain {

using graph::Mark;

namespace {

std::set<graph::NamePair> hard_arrows(const discovery::BackgroundKnowledge& bk) {
    auto out = bk.required;
    out.insert(bk.confirmed.begin(), bk.confirmed.end());
    return out;
}

bool is_interface(const graph::Edge& e, const std::string& target, const NameSet& boundary) {
    if (target.empty()) return false;
    return (e.a == target && boundary.contains(e.b)) || (e.b == target && boundary.contains(e.a));
}

}  // namespace

MixedGraph enforce_constraints(const MixedGraph& gw, const discovery::BackgroundKnowledge& constraints) {
    MixedGraph g = gw;
    const auto arrows = hard_arrows(constraints);
    for (const auto& [a, b] : arrows) {
        if (constraints.forbidden.contains({a, b}))
            throw ValidationError("edge " + a + " -> " + b + " is both required and forbidden");
        g.ensure_vertex(a);
        g.ensure_vertex(b);
        g.add_directed(a, b);
    }
    for (const auto& [a, b] : constraints.forbidden)
        if (g.has_vertex(a) && g.has_vertex(b) && g.has_directed(a, b)) {
            log::info("mechanism graph: removing forbidden edge " + a + " -> " + b);
            g.remove_edge(a, b);
        }
    if (!graph::is_acyclic(g)) throw ValidationError("mechanism graph has a directed cycle after enforcing constraints");
    return g;
}

MixedGraph conn_min(const MixedGraph& gw, const NameSet& roots, const NameSet& boundary,
                    const discovery::BackgroundKnowledge& confirmed) {
    MixedGraph g = enforce_constraints(gw, confirmed);
    for (const auto& r : roots) {
        if (!g.has_vertex(r)) throw ValidationError("root '" + r + "' is not in the mechanism graph");
        if (!g.parents(r).empty()) log::warn("root '" + r + "' has incoming edges in the mechanism graph");
    }
    std::size_t ignored = 0;
    for (const auto& e : g.edges()) ignored += e.directed() ? 0 : 1;
    if (ignored > 0) log::warn("conn_min: ignoring " + std::to_string(ignored) + " non-directed mechanism edge(s)");
    for (const auto& b : boundary)
        if (!g.has_vertex(b)) g.add_vertex(b);

    const auto d = graph::directed_part(g);
    const auto forward = graph::reach_forward(d, roots);
    NameSet keep, isolated;
    for (const auto& b : boundary) {
        bool reached = false;
        for (const auto& v : graph::reach_backward(d, {b}))
            if (forward.contains(v)) {
                keep.insert(v);
                reached = true;
            }
        if (!reached) {
            log::warn("boundary vertex '" + b + "' is not reachable from any root; kept isolated");
            isolated.insert(b);
        }
    }
    auto out = d.induced(keep);
    for (const auto& b : isolated)
        if (!out.has_vertex(b)) out.add_vertex(d.vertex(b));
    return out;
}

ExplanatorySubgraph assemble_e_y(const MixedGraph& conn, const NameSet& boundary, const std::string& target,
                                 const MixedGraph& local, const NameSet& roots,
                                 const discovery::BackgroundKnowledge& confirmed) {
    ExplanatorySubgraph e;
    e.graph = conn;
    e.target = target;
    e.boundary = boundary;
    auto place = [&](const std::string& name) {
        if (e.graph.has_vertex(name)) return;
        if (local.has_vertex(name))
            e.graph.add_vertex(local.vertex(name));
        else
            e.graph.add_vertex(name);
    };
    place(target);
    for (const auto& b : boundary) place(b);
    if (boundary.empty()) {
        e.degenerate = true;
        e.notes.push_back("empty boundary: E_Y is the target alone");
    }

    const auto arrows = hard_arrows(confirmed);
    for (const auto& b : boundary) {
        if (b == target) continue;
        std::optional<std::pair<Mark, Mark>> mech, loc;
        if (conn.has_vertex(b) && conn.has_vertex(target)) mech = conn.marks(b, target);
        if (local.has_vertex(b) && local.has_vertex(target)) loc = local.marks(b, target);
        std::pair<Mark, Mark> chosen{Mark::tail, Mark::tail};
        std::string source;
        if (arrows.contains({b, target})) {
            chosen = {Mark::tail, Mark::arrow};
            source = "confirmed";
        } else if (arrows.contains({target, b})) {
            chosen = {Mark::arrow, Mark::tail};
            source = "confirmed";
        } else if (loc && loc->first != loc->second &&
                   (loc->first == Mark::tail || loc->second == Mark::tail)) {
            chosen = *loc;
            source = "local";
        } else if (mech) {
            chosen = *mech;
            source = "mechanism";
        } else if (loc) {
            chosen = *loc;
            source = "local";
        } else {
            continue;
        }
        if (mech && *mech != chosen)
            e.notes.push_back("edge " + b + " - " + target + ": mechanism orientation overridden by " + source);
        if (loc && *loc != chosen && source == "confirmed")
            e.notes.push_back("edge " + b + " - " + target + ": local orientation overridden by confirmed");
        e.graph.set_edge(b, target, chosen.first, chosen.second);
    }
    if (!graph::is_acyclic(e.graph)) {
        e.notes.push_back("E_Y contains a directed cycle");
        log::warn("assemble_e_y: E_Y contains a directed cycle");
    }
    for (const auto& r : roots)
        if (e.graph.has_vertex(r)) e.roots.insert(r);
    return e;
}

MinimalityReport verify_minimality(const ExplanatorySubgraph& e) {
    MinimalityReport report;
    auto fail = [&](std::string why) {
        report.pass = false;
        report.violations.push_back(std::move(why));
    };
    const auto& g = e.graph;
    if (!e.target.empty() && !g.has_vertex(e.target)) fail("target " + e.target + " missing");
    NameSet present_roots, present_boundary;
    for (const auto& b : e.boundary) {
        if (g.has_vertex(b))
            present_boundary.insert(b);
        else
            fail("boundary vertex " + b + " missing");
    }
    for (const auto& r : e.roots)
        if (g.has_vertex(r)) present_roots.insert(r);

    const auto d = graph::directed_part(g);
    const auto forward = graph::reach_forward(d, present_roots);
    const auto backward = graph::reach_backward(d, present_boundary);
    for (const auto& v : g.names()) {
        if (present_roots.contains(v) || present_boundary.contains(v) || v == e.target) continue;
        if (!forward.contains(v) || !backward.contains(v)) fail("vertex " + v + " is not on a root-to-boundary path");
    }
    for (const auto& edge : g.edges()) {
        if (is_interface(edge, e.target, e.boundary)) continue;
        if (!edge.directed()) {
            fail("edge " + edge.a + " - " + edge.b + " is not directed");
            continue;
        }
        const auto& u = edge.source();
        const auto& v = edge.target();
        if (!forward.contains(u) || !backward.contains(v))
            fail("edge " + u + " -> " + v + " is not on a root-to-boundary path");
        if (e.source && !(e.source->has_vertex(u) && e.source->has_vertex(v) && e.source->has_directed(u, v)))
            fail("edge " + u + " -> " + v + " is not in the mechanism graph");
    }
    if (e.source) {
        const auto sd = graph::directed_part(*e.source);
        NameSet sr, sb;
        for (const auto& r : e.roots)
            if (sd.has_vertex(r)) sr.insert(r);
        for (const auto& b : e.boundary)
            if (sd.has_vertex(b)) sb.insert(b);
        const auto sf = graph::reach_forward(sd, sr);
        const auto sbk = graph::reach_backward(sd, sb);
        for (const auto& edge : sd.edges()) {
            const auto& u = edge.source();
            const auto& v = edge.target();
            if (sf.contains(u) && sbk.contains(v) && !(g.has_vertex(u) && g.has_vertex(v) && g.has_directed(u, v)))
                fail("path edge " + u + " -> " + v + " of the mechanism graph is missing");
        }
    }
    return report;
}

MixedGraph project(const MixedGraph& g, const data::SupportSet& supports) {
    std::map<std::string, std::vector<std::string>> lifted;
    MixedGraph out;
    for (const auto& v : g.vertices()) {
        auto it = supports.find(v.name);
        std::vector<std::string> s;
        if (it != supports.end()) {
            if (it->second.empty()) throw ValidationError("empty support for '" + v.name + "'");
            s.assign(it->second.begin(), it->second.end());
        } else if (v.kind == graph::VertexKind::constructed) {
            throw ValidationError("constructed vertex '" + v.name + "' has no support entry");
        } else {
            s = {v.name};
        }
        for (const auto& x : s)
            if (!out.has_vertex(x)) {
                if (it == supports.end())
                    out.add_vertex(v);
                else
                    out.add_vertex(x);
            }
        lifted[v.name] = std::move(s);
    }
    for (const auto& e : g.edges())
        for (const auto& x : lifted.at(e.a))
            for (const auto& y : lifted.at(e.b)) {
                if (x == y) continue;
                Mark mx = e.mark_a, my = e.mark_b;
                if (const auto prior = out.marks(x, y)) {
                    if (prior->first != mx) mx = Mark::circle;
                    if (prior->second != my) my = Mark::circle;
                }
                out.set_edge(x, y, mx, my);
            }
    return out;
}

nlohmann::json to_json(const ExplanatorySubgraph& e) {
    return {{"target", e.target},
            {"boundary", e.boundary},
            {"roots", e.roots},
            {"degenerate", e.degenerate},
            {"notes", e.notes},
            {"graph", graph::to_json(e.graph)}};
}

}  // namespace causeway::explain
