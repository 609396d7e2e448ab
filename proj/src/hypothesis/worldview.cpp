#include "causeway/hypothesis/worldview.hpp"

#include <algorithm>
#include <cmath>

#include "causeway/common.hpp"
#include "causeway/graph/algorithms.hpp"
#include "causeway/graph/serialize.hpp"

namespace causeway::hypothesis {

using nlohmann::json;

const char* to_string(VariableStatus s) {
    switch (s) {
        case VariableStatus::observable: return "observable";
        case VariableStatus::constructible: return "constructible";
        case VariableStatus::uncertain: return "uncertain";
    }
    return "uncertain";
}

std::optional<VariableStatus> parse_status(std::string_view text) {
    if (text == "observable") return VariableStatus::observable;
    if (text == "constructible") return VariableStatus::constructible;
    if (text == "uncertain") return VariableStatus::uncertain;
    return std::nullopt;
}

const Variable* Worldview::variable(const std::string& name) const {
    for (const auto& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

Link* Worldview::link(const std::string& source, const std::string& target) {
    for (auto& l : links)
        if (l.source == source && l.target == target) return &l;
    return nullptr;
}

const Link* Worldview::link(const std::string& source, const std::string& target) const {
    return const_cast<Worldview*>(this)->link(source, target);
}

std::set<std::string> Worldview::effective_roots() const {
    if (!roots.empty()) return roots;
    std::set<std::string> out;
    for (const auto& v : mechanism.names())
        if (mechanism.parents(v).empty()) out.insert(v);
    return out;
}

MixedGraph mechanism_from_links(const std::vector<Variable>& variables, const std::vector<Link>& links) {
    MixedGraph g;
    for (const auto& v : variables) {
        graph::Vertex vx{v.name, v.scale, graph::VertexKind::observed, {}};
        if (v.status == VariableStatus::constructible) {
            vx.kind = graph::VertexKind::constructed;
            vx.factor = v.factor ? v.factor->name : v.name;
        } else if (v.status == VariableStatus::uncertain) {
            vx.kind = graph::VertexKind::hypothesis;
        }
        g.add_vertex(vx);
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
        const auto& l = links[i];
        g.ensure_vertex(l.source);
        g.ensure_vertex(l.target);
        if (l.source == l.target) continue;
        if (g.has_directed(l.target, l.source))
            throw ValidationError("/competition_relationship/" + std::to_string(i) + ": links " + l.source + " -> " +
                                  l.target + " and " + l.target + " -> " + l.source +
                                  " both present; give an explicit mechanism_graph");
        g.add_directed(l.source, l.target);
    }
    return g;
}

void validate(const Worldview& w) {
    if (w.id.empty()) throw ValidationError("/id: worldview id must be non-empty");
    std::set<std::string> names;
    for (std::size_t i = 0; i < w.variables.size(); ++i) {
        const auto& v = w.variables[i];
        const std::string path = "/unified_indicators/" + std::to_string(i);
        if (v.name.empty()) throw ValidationError(path + "/name: must be non-empty");
        if (!names.insert(v.name).second) throw ValidationError(path + "/name: duplicate variable '" + v.name + "'");
        if (v.status == VariableStatus::constructible && !v.factor)
            throw ValidationError(path + "/factor: constructible variable '" + v.name + "' needs a factor spec");
    }
    for (std::size_t i = 0; i < w.links.size(); ++i) {
        const auto& l = w.links[i];
        const std::string path = "/competition_relationship/" + std::to_string(i);
        if (!names.contains(l.source)) throw ValidationError(path + "/source: unknown variable '" + l.source + "'");
        if (!names.contains(l.target)) throw ValidationError(path + "/target: unknown variable '" + l.target + "'");
        if (l.source == l.target) throw ValidationError(path + ": self-link on '" + l.source + "'");
        if (l.explanations.empty()) throw ValidationError(path + "/explanations: at least one explanation required");
        for (std::size_t k = 0; k < l.explanations.size(); ++k) {
            const double s = l.explanations[k].support;
            if (!(s >= 0.0 && s <= 1.0))
                throw ValidationError(path + "/explanations/" + std::to_string(k) +
                                      "/support_estimation: must lie in [0, 1]");
        }
    }
    if (!w.target.empty() && !names.contains(w.target)) throw ValidationError("/target: unknown variable '" + w.target + "'");
    for (const auto& v : w.mechanism.names())
        if (!names.contains(v)) throw ValidationError("/mechanism_graph: unknown vertex '" + v + "'");
    if (!graph::is_acyclic(w.mechanism)) throw ValidationError("/mechanism_graph: directed cycle");
    for (const auto& r : w.roots)
        if (!names.contains(r)) throw ValidationError("/roots: unknown variable '" + r + "'");
}

namespace {

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ValidationError(path + ": expected object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path + "/" + key + ": missing required field");
    return *it;
}

std::string text(const json& obj, const char* key, const std::string& path, bool required = true) {
    if (!obj.contains(key)) {
        if (required) throw ValidationError(path + "/" + key + ": missing required field");
        return {};
    }
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ValidationError(path + "/" + key + ": expected string");
    return v.get<std::string>();
}

const json& array(const json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_array()) throw ValidationError(path + "/" + key + ": expected array");
    return v;
}

}  // namespace

Worldview worldview_from_json(const json& j) {
    Worldview w;
    w.id = text(j, "id", "");
    w.target = text(j, "target", "", false);
    const auto& vars = array(j, "unified_indicators", "");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const std::string path = "/unified_indicators/" + std::to_string(i);
        const auto& jv = vars[i];
        Variable v;
        v.name = text(jv, "name", path);
        v.description = text(jv, "description", path, false);
        if (jv.contains("scale")) {
            auto s = graph::parse_scale(text(jv, "scale", path));
            if (!s) throw ValidationError(path + "/scale: unknown scale '" + jv["scale"].get<std::string>() + "'");
            v.scale = *s;
        }
        if (jv.contains("status")) {
            auto s = parse_status(text(jv, "status", path));
            if (!s) throw ValidationError(path + "/status: unknown status '" + jv["status"].get<std::string>() + "'");
            v.status = *s;
        }
        if (jv.contains("factor") && !jv["factor"].is_null()) v.factor = data::factor_from_json(jv["factor"], path + "/factor");
        w.variables.push_back(std::move(v));
    }
    const auto& links = array(j, "competition_relationship", "");
    for (std::size_t i = 0; i < links.size(); ++i) {
        const std::string path = "/competition_relationship/" + std::to_string(i);
        Link l;
        l.source = text(links[i], "source", path);
        l.target = text(links[i], "target", path);
        const auto& ex = array(links[i], "explanations", path);
        for (std::size_t k = 0; k < ex.size(); ++k) {
            const std::string ep = path + "/explanations/" + std::to_string(k);
            Explanation e;
            e.text = text(ex[k], "text", ep);
            e.prerequisites = text(ex[k], "prerequisites", ep, false);
            e.evidence = text(ex[k], "evidence", ep, false);
            const auto& s = field(ex[k], "support_estimation", ep);
            if (!s.is_number()) throw ValidationError(ep + "/support_estimation: expected number");
            e.support = s.get<double>();
            l.explanations.push_back(std::move(e));
        }
        w.links.push_back(std::move(l));
    }
    if (j.contains("mechanism_graph")) {
        try {
            w.mechanism = graph::from_json(j["mechanism_graph"]);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("/mechanism_graph") + e.what());
        }
    } else {
        // Unknown link endpoints are reported by validate() with their path.
        std::set<std::string> names;
        for (const auto& v : w.variables) names.insert(v.name);
        for (std::size_t i = 0; i < w.links.size(); ++i) {
            const std::string path = "/competition_relationship/" + std::to_string(i);
            if (!names.contains(w.links[i].source))
                throw ValidationError(path + "/source: unknown variable '" + w.links[i].source + "'");
            if (!names.contains(w.links[i].target))
                throw ValidationError(path + "/target: unknown variable '" + w.links[i].target + "'");
        }
        w.mechanism = mechanism_from_links(w.variables, w.links);
    }
    if (j.contains("roots")) {
        const auto& roots = array(j, "roots", "");
        for (std::size_t i = 0; i < roots.size(); ++i) {
            if (!roots[i].is_string()) throw ValidationError("/roots/" + std::to_string(i) + ": expected string");
            w.roots.insert(roots[i].get<std::string>());
        }
    }
    if (j.contains("forbidden")) {
        const auto& f = array(j, "forbidden", "");
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!f[i].is_array() || f[i].size() != 2 || !f[i][0].is_string() || !f[i][1].is_string())
                throw ValidationError("/forbidden/" + std::to_string(i) + ": expected [source, target]");
            w.forbidden.insert({f[i][0].get<std::string>(), f[i][1].get<std::string>()});
        }
    }
    if (j.contains("history")) {
        const auto& h = array(j, "history", "");
        for (const auto& entry : h) {
            if (!entry.is_string()) throw ValidationError("/history: expected strings");
            w.history.push_back(entry.get<std::string>());
        }
    }
    validate(w);
    return w;
}

json to_json(const Worldview& w) {
    json vars = json::array();
    for (const auto& v : w.variables) {
        json jv = {{"name", v.name},
                   {"description", v.description},
                   {"scale", graph::to_string(v.scale)},
                   {"status", to_string(v.status)}};
        if (v.factor) jv["factor"] = data::to_json(*v.factor);
        vars.push_back(std::move(jv));
    }
    json links = json::array();
    for (const auto& l : w.links) {
        json ex = json::array();
        for (const auto& e : l.explanations)
            ex.push_back({{"text", e.text},
                          {"prerequisites", e.prerequisites},
                          {"evidence", e.evidence},
                          {"support_estimation", e.support}});
        links.push_back({{"source", l.source}, {"target", l.target}, {"explanations", ex}});
    }
    json forbidden = json::array();
    for (const auto& [a, b] : w.forbidden) forbidden.push_back({a, b});
    json out = {{"id", w.id},
                {"unified_indicators", vars},
                {"competition_relationship", links},
                {"mechanism_graph", graph::to_json(w.mechanism)},
                {"roots", w.roots},
                {"forbidden", forbidden},
                {"history", w.history}};
    if (!w.target.empty()) out["target"] = w.target;
    return out;
}

double RuleJudge::rubric(const Worldview& w) const {
    if (w.links.empty()) return 1.0;
    double total = 0.0;
    for (const auto& l : w.links) {
        double best = 0.0;
        for (const auto& e : l.explanations) best = std::max(best, e.support);
        total += best;
    }
    return 1.0 + 9.0 * total / static_cast<double>(w.links.size());
}

int RuleJudge::compare(const Worldview& a, const Worldview& b) const {
    const double ra = rubric(a), rb = rubric(b);
    return ra > rb ? 1 : (ra < rb ? -1 : 0);
}

std::vector<std::string> RuleJudge::rank_all(const std::vector<const Worldview*>& tied) const {
    std::vector<const Worldview*> order(tied);
    std::stable_sort(order.begin(), order.end(),
                     [&](const Worldview* a, const Worldview* b) { return rubric(*a) > rubric(*b); });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (rubric(*order[i]) == rubric(*order[i - 1])) return {};
    std::vector<std::string> ids;
    for (const auto* w : order) ids.push_back(w->id);
    return ids;
}

Selection select_worldview_detailed(const std::vector<Worldview>& candidates, const Judge& judge, int shortlist) {
    if (candidates.empty()) throw ValidationError("select_worldview: no candidates");
    if (shortlist < 1) throw ValidationError("select_worldview: shortlist size must be >= 1");
    Selection sel;
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
        sel.rubric.push_back({candidates[i].id, judge.rubric(candidates[i])});
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sel.rubric[a].second != sel.rubric[b].second) return sel.rubric[a].second > sel.rubric[b].second;
        return candidates[a].id < candidates[b].id;
    });
    order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(shortlist)));
    for (std::size_t i : order) {
        sel.shortlist.push_back(candidates[i].id);
        sel.wins[candidates[i].id] = 0;
    }
    for (std::size_t x = 0; x < order.size(); ++x)
        for (std::size_t y = x + 1; y < order.size(); ++y) {
            const auto& a = candidates[order[x]];
            const auto& b = candidates[order[y]];
            const int r = judge.compare(a, b);
            if (r > 0) ++sel.wins[a.id];
            if (r < 0) ++sel.wins[b.id];
        }
    int top = -1;
    for (const auto& [_, w] : sel.wins) top = std::max(top, w);
    std::vector<const Worldview*> tied;
    for (std::size_t i : order)
        if (sel.wins[candidates[i].id] == top) tied.push_back(&candidates[i]);
    std::sort(tied.begin(), tied.end(), [](const Worldview* a, const Worldview* b) { return a->id < b->id; });
    if (tied.size() == 1) {
        sel.chosen = tied.front()->id;
        return sel;
    }
    sel.cycle = true;
    const auto ranked = judge.rank_all(tied);
    if (!ranked.empty()) {
        sel.chosen = ranked.front();
        sel.notes.push_back("tie on wins resolved by multi-way adjudication");
    } else {
        sel.chosen = tied.front()->id;
        sel.notes.push_back("tie on wins unresolved; chose by id order");
    }
    return sel;
}

Worldview select_worldview(const std::vector<Worldview>& candidates, const Judge& judge, int shortlist) {
    const auto sel = select_worldview_detailed(candidates, judge, shortlist);
    for (const auto& w : candidates)
        if (w.id == sel.chosen) return w;
    throw ValidationError("select_worldview: judge returned unknown id '" + sel.chosen + "'");
}

NodeReport validate_worldview(const Worldview& w, const data::Dataset& ds) {
    NodeReport report;
    std::map<std::string, VariableStatus> status;
    std::map<std::string, std::string> reason;
    for (const auto& v : w.variables)
        if (ds.has(v.name)) {
            status[v.name] = VariableStatus::observable;
            reason[v.name] = "logged column";
        }
    // Resolve constructible variables in dependency order: a spec may read
    // other constructible variables once those materialize.
    data::Dataset work = ds;
    bool progress = true;
    while (progress) {
        progress = false;
        for (const auto& v : w.variables) {
            if (status.contains(v.name) || !v.factor) continue;
            bool ready = true;
            for (const auto& in : v.factor->inputs) ready = ready && work.has(in);
            if (!ready) continue;
            try {
                auto spec = *v.factor;
                spec.name = v.name;
                work = data::materialize_factor(work, spec);
                status[v.name] = VariableStatus::constructible;
                reason[v.name] = std::string("materialized as ") + data::to_string(spec.kind);
                progress = true;
            } catch (const std::exception& e) {
                status[v.name] = VariableStatus::uncertain;
                reason[v.name] = std::string("factor spec rejected: ") + e.what();
            }
        }
    }
    for (const auto& v : w.variables) {
        NodeStatus s{v.name, VariableStatus::uncertain, {}};
        if (auto it = status.find(v.name); it != status.end()) {
            s.status = it->second;
            s.reason = reason[v.name];
        } else if (v.factor) {
            std::string missing;
            for (const auto& in : v.factor->inputs)
                if (!work.has(in)) missing += (missing.empty() ? "" : ", ") + in;
            s.reason = "factor inputs not available: " + missing;
        } else {
            s.reason = "no logged column and no factor spec";
        }
        if (s.status == VariableStatus::uncertain) report.uncertain.push_back(v.name);
        report.nodes.push_back(std::move(s));
    }
    return report;
}

namespace {

// The confirmed arrow (from, to) of an adjudication, if it has exactly one.
std::optional<NamePair> confirmed_arrow(const intervene::EdgeAdjudication& e) {
    if (e.verdict != intervene::Verdict::confirmed) return std::nullopt;
    if (e.orientation == intervene::Orientation::source_to_target) return e.pair;
    if (e.orientation == intervene::Orientation::target_to_source) return NamePair{e.pair.second, e.pair.first};
    return std::nullopt;
}

void demote(Link& l) {
    for (auto& e : l.explanations) e.support *= kDemotion;
}

}  // namespace

bool contradicts(const Worldview& w, const intervene::EdgeAdjudication& evidence) {
    const auto& [a, b] = evidence.pair;
    if (!w.mechanism.has_vertex(a) || !w.mechanism.has_vertex(b)) return false;
    if (auto arrow = confirmed_arrow(evidence)) {
        return w.mechanism.has_directed(arrow->second, arrow->first) || w.forbidden.contains(*arrow);
    }
    return evidence.verdict == intervene::Verdict::refuted && w.mechanism.adjacent(a, b);
}

Worldview apply_contradiction(const Worldview& w, const intervene::EdgeAdjudication& evidence) {
    if (!contradicts(w, evidence)) return w;
    Worldview out = w;
    if (auto arrow = confirmed_arrow(evidence)) {
        const auto& [from, to] = *arrow;
        out.forbidden.erase(*arrow);
        if (out.mechanism.has_directed(to, from)) {
            out.mechanism.remove_edge(to, from);
            if (Link* l = out.link(to, from)) {
                demote(*l);
                std::swap(l->source, l->target);
            }
            if (graph::creates_cycle(out.mechanism, from, to)) {
                out.history.push_back("removed " + to + " -> " + from + ": confirmed " + from + " -> " + to +
                                      " would close a cycle");
            } else {
                out.mechanism.add_directed(from, to);
                out.history.push_back("flipped " + to + " -> " + from + " to match confirmed " + from + " -> " + to);
            }
        } else {
            if (!graph::creates_cycle(out.mechanism, from, to)) out.mechanism.add_directed(from, to);
            out.history.push_back("lifted forbidden " + from + " -> " + to + " after confirmation");
        }
        validate(out);
        return out;
    }
    // Refuted: drop the mechanism edge and shift support to the competing
    // links into the same target.
    const auto& [a, b] = evidence.pair;
    const bool forward = out.mechanism.has_directed(a, b);
    const std::string source = forward ? a : b, target = forward ? b : a;
    out.mechanism.remove_edge(a, b);
    out.history.push_back("removed refuted edge " + source + " - " + target);
    Link* refuted = out.link(source, target);
    if (!refuted) {
        validate(out);
        return out;
    }
    double lost = 0.0;
    for (const auto& e : refuted->explanations) lost += e.support * (1.0 - kDemotion);
    demote(*refuted);
    double others = 0.0;
    for (const auto& l : out.links)
        if (l.target == target && &l != refuted && out.mechanism.adjacent(l.source, l.target))
            for (const auto& e : l.explanations) others += e.support;
    if (others > 0.0 && lost > 0.0) {
        const double scale = (others + lost) / others;
        for (auto& l : out.links)
            if (l.target == target && &l != refuted && out.mechanism.adjacent(l.source, l.target))
                for (auto& e : l.explanations) e.support = std::min(1.0, e.support * scale);
    }
    validate(out);
    return out;
}

}  // namespace causeway::hypothesis
