#include "causeway/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "causeway/common.hpp"
#include "causeway/graph/algorithms.hpp"

namespace causeway::eval {

using graph::Mark;

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_score(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

FactorEvalReport categorize_factors(const NameSet& found, const NameSet& boundary, const NameSet& ancestors) {
    FactorEvalReport r;
    for (const auto& s : found) {
        if (boundary.contains(s)) ++r.mb;
        else if (ancestors.contains(s)) ++r.an;
        else ++r.ot;
    }
    if (found.empty()) r.flags.push_back("empty factor set: precision undefined");
    if (boundary.empty()) r.flags.push_back("empty boundary: recall undefined");
    r.precision = safe_ratio(r.mb, static_cast<double>(found.size()));
    r.recall = safe_ratio(r.mb, static_cast<double>(boundary.size()));
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

namespace {

graph::PairSet target_relations(const MixedGraph& g, const std::string& target) {
    graph::PairSet out;
    for (const auto& [u, v] : graph::transitive_closure(g))
        if (v == target && u != target) out.insert({u, v});
    return out;
}

void require_same_vertices(const MixedGraph& a, const MixedGraph& b) {
    const auto na = a.names(), nb = b.names();
    const NameSet sa(na.begin(), na.end()), sb(nb.begin(), nb.end());
    if (sa == sb) return;
    std::string msg = "vertex sets differ:";
    for (const auto& v : sa)
        if (!sb.contains(v)) msg += " +" + v;
    for (const auto& v : sb)
        if (!sa.contains(v)) msg += " -" + v;
    throw ValidationError(msg);
}

}  // namespace

AncestorReport ancestor_f1(const MixedGraph& predicted, const MixedGraph& truth, const std::string& target) {
    if (!predicted.has_vertex(target) || !truth.has_vertex(target))
        throw ValidationError("ancestor_f1: target '" + target + "' missing from a graph");
    const auto hat = target_relations(predicted, target);
    const auto star = target_relations(truth, target);
    AncestorReport r;
    r.predicted = hat.size();
    r.truth = star.size();
    for (const auto& p : hat) r.common += star.contains(p) ? 1 : 0;
    if (hat.empty() && star.empty()) {
        r.precision = r.recall = r.f1 = 1.0;
        return r;
    }
    r.precision = safe_ratio(static_cast<double>(r.common), static_cast<double>(r.predicted));
    r.recall = safe_ratio(static_cast<double>(r.common), static_cast<double>(r.truth));
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

StructureReport edge_metrics(const MixedGraph& predicted, const MixedGraph& truth) {
    require_same_vertices(predicted, truth);
    auto directed = [](const MixedGraph& g) {
        graph::PairSet out;
        for (const auto& e : g.edges())
            if (e.directed()) out.insert({e.source(), e.target()});
        return out;
    };
    const auto hat = directed(predicted), star = directed(truth);
    StructureReport r;
    for (const auto& p : hat) (star.contains(p) ? r.tp : r.fp) += 1;
    for (const auto& p : star) r.fn += hat.contains(p) ? 0 : 1;
    const long n = static_cast<long>(truth.size());
    r.tn = n * (n - 1) - r.tp - r.fp - r.fn;
    r.precision = safe_ratio(r.tp, r.tp + r.fp);
    r.recall = safe_ratio(r.tp, r.tp + r.fn);
    r.f1 = f1_score(r.precision, r.recall);
    r.accuracy = safe_ratio(r.tp + r.tn, n * (n - 1));
    r.fpr = safe_ratio(r.fp, r.fp + r.tn);
    return r;
}

ShdParts shd_decompose(const MixedGraph& predicted, const MixedGraph& truth) {
    require_same_vertices(predicted, truth);
    ShdParts s;
    for (const auto& e : predicted.edges()) s.added += truth.adjacent(e.a, e.b) ? 0 : 1;
    for (const auto& e : truth.edges()) {
        const auto hat = predicted.marks(e.a, e.b);
        if (!hat) {
            ++s.missed;
            continue;
        }
        const std::pair<Mark, Mark> star{e.mark_a, e.mark_b};
        if (*hat == star) continue;
        const bool both_directed = e.directed() && ((hat->first == Mark::tail && hat->second == Mark::arrow) ||
                                                    (hat->first == Mark::arrow && hat->second == Mark::tail));
        if (both_directed) ++s.reversed;
        else ++s.unoriented;
    }
    s.shd = s.added + s.missed + s.reversed + s.unoriented;
    return s;
}

StructureReport structure_report(const MixedGraph& predicted, const MixedGraph& truth) {
    auto r = edge_metrics(predicted, truth);
    const auto s = shd_decompose(predicted, truth);
    r.added = s.added;
    r.missed = s.missed;
    r.reversed = s.reversed;
    r.unoriented = s.unoriented;
    r.shd = s.shd;
    return r;
}

std::map<std::string, double> rwr_scores(const MixedGraph& g, const std::string& target, double alpha) {
    if (!g.has_vertex(target)) throw ValidationError("rwr: target '" + target + "' not in graph");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("rwr: restart probability must lie in (0, 1)");
    std::map<std::string, double> pi;
    for (const auto& v : g.names()) pi[v] = 0.0;

    // Connected component of the target, edges taken without direction.
    NameSet comp{target};
    std::vector<std::string> frontier{target};
    while (!frontier.empty()) {
        const auto v = frontier.back();
        frontier.pop_back();
        for (const auto& w : g.neighbors(v))
            if (comp.insert(w).second) frontier.push_back(w);
    }
    std::vector<std::string> nodes(comp.begin(), comp.end());
    std::map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < nodes.size(); ++i) at[nodes[i]] = i;

    // Walk step v -> u for every u that may cause v: no arrowhead at u, and
    // either an arrowhead or circle at v or an undirected edge.
    auto may_cause = [](Mark at_u, Mark at_v) {
        return at_u != Mark::arrow && (at_v != Mark::tail || at_u == Mark::tail);
    };
    std::vector<std::vector<std::size_t>> up(nodes.size());
    for (const auto& e : g.edges()) {
        if (!comp.contains(e.a)) continue;
        const std::size_t a = at[e.a], b = at[e.b];
        if (may_cause(e.mark_a, e.mark_b)) up[b].push_back(a);
        if (may_cause(e.mark_b, e.mark_a)) up[a].push_back(b);
    }

    const std::size_t y = at[target];
    std::vector<double> p(nodes.size(), 0.0), next(nodes.size());
    p[y] = 1.0;
    for (int iter = 0; iter < 100000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        next[y] += alpha;
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            const double moving = (1.0 - alpha) * p[v];
            if (up[v].empty()) {
                next[y] += moving;
                continue;
            }
            const double share = moving / static_cast<double>(up[v].size());
            for (std::size_t u : up[v]) next[u] += share;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) change += std::abs(next[i] - p[i]);
        p.swap(next);
        if (change < 1e-10) break;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) pi[nodes[i]] = p[i];
    return pi;
}

std::vector<RankedScript> rank_scripts(const std::vector<ScriptRef>& scripts, const std::map<std::string, double>& pi,
                                       const MixedGraph& g) {
    std::vector<RankedScript> out;
    for (const auto& s : scripts) {
        RankedScript r{s.id, s.node, 0.0, g.has_vertex(s.node)};
        if (r.mapped)
            if (auto it = pi.find(s.node); it != pi.end()) r.score = it->second;
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const RankedScript& a, const RankedScript& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.mapped != b.mapped) return a.mapped;
        return a.id < b.id;
    });
    return out;
}

RankingReport rank_metrics(const std::vector<std::string>& ranking, const std::map<std::string, bool>& labels, int k) {
    if (k < 1) throw ValidationError("rank_metrics: K must be >= 1");
    RankingReport r;
    r.k = k;
    int positives = 0;
    for (const auto& [_, ok] : labels) positives += ok ? 1 : 0;
    std::vector<int> hit;
    for (const auto& id : ranking) {
        const auto it = labels.find(id);
        if (it == labels.end()) throw ValidationError("rank_metrics: no label for script '" + id + "'");
        hit.push_back(it->second ? 1 : 0);
    }
    if (positives == 0) {
        r.flags.push_back("no successful scripts");
        return r;
    }
    int found = 0;
    double ap = 0.0;
    for (int i = 0; i < static_cast<int>(hit.size()); ++i) {
        if (!hit[i]) continue;
        ++found;
        if (r.mrr == 0.0) r.mrr = 1.0 / (i + 1);
        if (i < k) ap += static_cast<double>(found) / (i + 1);
    }
    int top = 0;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(hit.size())); ++i) top += hit[i];
    r.precision_at_k = static_cast<double>(top) / k;
    r.map_at_k = ap / std::min(k, positives);
    return r;
}

nlohmann::json to_json(const FactorEvalReport& r) {
    return {{"MB", r.mb},
            {"AN", r.an},
            {"OT", r.ot},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"flags", r.flags}};
}

nlohmann::json to_json(const AncestorReport& r) {
    return {{"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"predicted", r.predicted},
            {"truth", r.truth},
            {"common", r.common}};
}

nlohmann::json to_json(const StructureReport& r) {
    return {{"TP", r.tp},          {"FP", r.fp},
            {"FN", r.fn},          {"TN", r.tn},
            {"precision", r.precision}, {"recall", r.recall},
            {"f1", r.f1},          {"accuracy", r.accuracy},
            {"fpr", r.fpr},        {"added", r.added},
            {"missed", r.missed},  {"reversed", r.reversed},
            {"unoriented", r.unoriented}, {"shd", r.shd}};
}

nlohmann::json to_json(const RankingReport& r) {
    nlohmann::json ranking = nlohmann::json::array();
    for (const auto& s : r.ranking)
        ranking.push_back({{"id", s.id}, {"node", s.node}, {"score", s.score}, {"mapped", s.mapped}});
    return {{"K", r.k},
            {"precision_at_k", r.precision_at_k},
            {"map_at_k", r.map_at_k},
            {"mrr", r.mrr},
            {"ranking", ranking},
            {"flags", r.flags}};
}

}  // namespace causeway::eval
