#include "causeway/discovery/pc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causeway/common.hpp"
#include "causeway/graph/algorithms.hpp"
#include "causeway/random.hpp"

namespace causeway::discovery {

using graph::Mark;

void BackgroundKnowledge::confirm(const std::string& from, const std::string& to) {
    confirmed.insert({from, to});
    required.insert({from, to});
}

std::vector<std::string> BackgroundKnowledge::conflicts() const {
    std::vector<std::string> out;
    for (const auto& [a, b] : required) {
        if (forbidden.contains({a, b})) out.push_back("required edge " + a + " -> " + b + " is also forbidden");
        if (a < b && required.contains({b, a}))
            out.push_back("edge " + a + " - " + b + " is required in both directions");
    }
    for (const auto& c : confirmed)
        if (!required.contains(c)) out.push_back("confirmed edge " + c.first + " -> " + c.second + " is not required");
    return out;
}

namespace {

nlohmann::json pairs_to_json(const std::set<NamePair>& pairs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [a, b] : pairs) out.push_back({a, b});
    return out;
}

std::set<NamePair> pairs_from_json(const nlohmann::json& j, const std::string& key) {
    std::set<NamePair> out;
    if (!j.contains(key)) return out;
    const auto& arr = j[key];
    if (!arr.is_array()) throw ValidationError("/" + key + ": expected array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& p = arr[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
            throw ValidationError("/" + key + "/" + std::to_string(i) + ": expected [\"a\", \"b\"]");
        out.insert({p[0].get<std::string>(), p[1].get<std::string>()});
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

}  // namespace

nlohmann::json to_json(const BackgroundKnowledge& bk) {
    return {{"required", pairs_to_json(bk.required)},
            {"forbidden", pairs_to_json(bk.forbidden)},
            {"confirmed", pairs_to_json(bk.confirmed)}};
}

BackgroundKnowledge bk_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError(": expected object");
    BackgroundKnowledge bk;
    bk.required = pairs_from_json(j, "required");
    bk.forbidden = pairs_from_json(j, "forbidden");
    bk.confirmed = pairs_from_json(j, "confirmed");
    bk.required.insert(bk.confirmed.begin(), bk.confirmed.end());
    return bk;
}

ConstraintConflict::ConstraintConflict(std::vector<std::string> conflicts)
    : std::runtime_error("conflicting background knowledge: " + join(conflicts)), conflicts_(std::move(conflicts)) {}

namespace {

// Calls fn on every size-k subset of `items` in lexicographic order until fn
// returns true. Returns whether fn ever returned true.
template <typename Fn>
bool for_each_subset(const std::vector<int>& items, int k, Fn&& fn) {
    const int n = static_cast<int>(items.size());
    if (k > n) return false;
    std::vector<int> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    std::vector<int> subset(k);
    while (true) {
        for (int i = 0; i < k; ++i) subset[i] = items[pick[i]];
        if (fn(subset)) return true;
        int i = k - 1;
        while (i >= 0 && pick[i] == n - k + i) --i;
        if (i < 0) return false;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
}

bool try_orient(MixedGraph& g, const std::string& from, const std::string& to, std::vector<std::string>* notes,
                const char* rule) {
    if (graph::creates_cycle(g, from, to)) {
        const std::string msg = std::string(rule) + ": leaving " + from + " - " + to + " unoriented (cycle)";
        log::debug(msg);
        if (notes) notes->push_back(msg);
        return false;
    }
    g.add_directed(from, to);
    return true;
}

bool meek_pass(MixedGraph& g, std::vector<std::string>* notes) {
    bool changed = false;
    for (const auto& e : g.edges()) {
        if (!e.undirected()) continue;
        for (const auto& [x, y] : {NamePair{e.a, e.b}, NamePair{e.b, e.a}}) {
            if (!g.has_undirected(x, y)) break;
            bool fire = false;
            const char* rule = "";
            // Rule 1: a -> x - y with a, y nonadjacent.
            for (const auto& a : g.parents(x))
                if (a != y && !g.adjacent(a, y)) {
                    fire = true;
                    rule = "meek rule 1";
                    break;
                }
            // Rule 2: x -> c -> y with x - y.
            if (!fire)
                for (const auto& c : g.children(x))
                    if (g.has_directed(c, y)) {
                        fire = true;
                        rule = "meek rule 2";
                        break;
                    }
            // Rule 3: x - c -> y, x - d -> y, c and d nonadjacent.
            if (!fire) {
                std::vector<std::string> cands;
                for (const auto& c : g.neighbors(x))
                    if (g.has_undirected(x, c) && g.has_directed(c, y)) cands.push_back(c);
                for (std::size_t i = 0; i < cands.size() && !fire; ++i)
                    for (std::size_t j = i + 1; j < cands.size(); ++j)
                        if (!g.adjacent(cands[i], cands[j])) {
                            fire = true;
                            rule = "meek rule 3";
                            break;
                        }
            }
            // Rule 4: x - k -> l -> y with x adjacent l, k and y nonadjacent.
            if (!fire)
                for (const auto& k : g.neighbors(x)) {
                    if (!g.has_undirected(x, k) || g.adjacent(k, y) || k == y) continue;
                    for (const auto& l : g.children(k))
                        if (l != x && g.adjacent(x, l) && g.has_directed(l, y)) {
                            fire = true;
                            rule = "meek rule 4";
                            break;
                        }
                    if (fire) break;
                }
            if (fire && try_orient(g, x, y, notes, rule)) {
                changed = true;
                break;
            }
        }
    }
    return changed;
}

}  // namespace

MixedGraph meek_orient(MixedGraph g, std::vector<std::string>* notes) {
    while (meek_pass(g, notes)) {
    }
    return g;
}

MixedGraph apply_orientations(MixedGraph g, const std::set<NamePair>& arrows) {
    std::vector<std::string> conflicts;
    for (const auto& [from, to] : arrows) {
        g.ensure_vertex(from);
        g.ensure_vertex(to);
        if (g.has_directed(from, to)) continue;
        g.remove_edge(from, to);
        if (graph::creates_cycle(g, from, to)) {
            conflicts.push_back("arrow " + from + " -> " + to + " closes a directed cycle");
            continue;
        }
        g.add_directed(from, to);
    }
    if (!conflicts.empty()) throw ConstraintConflict(conflicts);
    return meek_orient(std::move(g));
}

PcResult pc_learn_detailed(const data::Dataset& ds, const std::vector<std::string>& vars_in,
                           const BackgroundKnowledge& bk, const PcOptions& options) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ValidationError("pc: alpha must lie in (0, 1)");
    if (auto c = bk.conflicts(); !c.empty()) throw ConstraintConflict(c);

    std::vector<std::string> vars = vars_in;
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    for (const auto& v : vars)
        if (!ds.has(v)) throw ValidationError("pc: unknown variable '" + v + "'");
    const int p = static_cast<int>(vars.size());

    PcResult result;
    ci::IndependenceTest tester(ds, vars, options.bins);
    if (options.audit) tester.set_audit(options.audit);

    std::vector<std::vector<char>> adj(p, std::vector<char>(p, 1));
    for (int i = 0; i < p; ++i) adj[i][i] = 0;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (bk.forbidden.contains({vars[i], vars[j]}) && bk.forbidden.contains({vars[j], vars[i]}))
                adj[i][j] = adj[j][i] = 0;

    auto neighbours = [&](const std::vector<std::vector<char>>& a, int v) {
        std::vector<int> out;
        for (int w = 0; w < p; ++w)
            if (a[v][w]) out.push_back(w);
        return out;
    };

    // PC-stable: neighbourhoods are frozen at the start of each level.
    for (int level = 0; level <= options.max_cond; ++level) {
        const auto frozen = adj;
        bool testable = false;
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) {
                if (!adj[i][j]) continue;
                for (const auto& [x, y] : {std::pair{i, j}, std::pair{j, i}}) {
                    if (!adj[i][j]) break;
                    auto cands = neighbours(frozen, x);
                    cands.erase(std::remove(cands.begin(), cands.end(), y), cands.end());
                    if (static_cast<int>(cands.size()) < level) continue;
                    testable = true;
                    for_each_subset(cands, level, [&](const std::vector<int>& subset) {
                        std::vector<std::string> cond;
                        for (int s : subset) cond.push_back(vars[s]);
                        ++result.tests;
                        const auto r = tester.test(vars[i], vars[j], cond, options.alpha);
                        if (!r.independent) return false;
                        adj[i][j] = adj[j][i] = 0;
                        result.sepsets[{vars[i], vars[j]}] = cond;
                        return true;
                    });
                }
            }
        }
        if (!testable) break;
    }

    MixedGraph g(vars);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (adj[i][j]) g.add_undirected(vars[i], vars[j]);

    // Fixed orientations from background knowledge.
    std::set<NamePair> fixed;
    std::vector<std::string> conflicts;
    const std::set<std::string> var_set(vars.begin(), vars.end());
    for (const auto& [a, b] : bk.required) {
        if (!var_set.contains(a) || !var_set.contains(b)) continue;
        if (!g.adjacent(a, b)) result.notes.push_back("injected required edge " + a + " -> " + b);
        g.remove_edge(a, b);
        if (graph::creates_cycle(g, a, b)) {
            conflicts.push_back("required edge " + a + " -> " + b + " closes a directed cycle");
            continue;
        }
        g.add_directed(a, b);
        fixed.insert(graph::unordered_key(a, b));
    }
    for (const auto& [a, b] : bk.forbidden) {
        if (!var_set.contains(a) || !var_set.contains(b) || !g.adjacent(a, b)) continue;
        if (fixed.contains(graph::unordered_key(a, b))) continue;
        if (graph::creates_cycle(g, b, a)) {
            conflicts.push_back("forbidding " + a + " -> " + b + " forces a directed cycle");
            continue;
        }
        g.add_directed(b, a);
        fixed.insert(graph::unordered_key(a, b));
    }
    if (!conflicts.empty()) throw ConstraintConflict(conflicts);

    // Unshielded colliders x -> z <- y with z outside sepset(x, y).
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const auto &x = vars[i], &y = vars[j];
            if (g.adjacent(x, y)) continue;
            const auto sep = result.sepsets.find({x, y});
            if (sep == result.sepsets.end()) continue;
            for (const auto& z : vars) {
                if (!g.adjacent(x, z) || !g.adjacent(y, z)) continue;
                if (std::find(sep->second.begin(), sep->second.end(), z) != sep->second.end()) continue;
                for (const auto& end : {x, y}) {
                    if (g.has_directed(end, z)) continue;
                    if (fixed.contains(graph::unordered_key(end, z)) || g.has_directed(z, end)) {
                        result.notes.push_back("collider " + x + " -> " + z + " <- " + y +
                                               " conflicts with an existing orientation at " + end);
                        continue;
                    }
                    try_orient(g, end, z, &result.notes, "collider");
                }
            }
        }
    }

    result.cpdag = meek_orient(std::move(g), &result.notes);
    return result;
}

MixedGraph pc_learn(const data::Dataset& ds, const std::vector<std::string>& vars, double alpha,
                    const BackgroundKnowledge& bk) {
    PcOptions options;
    options.alpha = alpha;
    return pc_learn_detailed(ds, vars, bk, options).cpdag;
}

std::vector<AmbiguousEdge> ambiguous_edges(const MixedGraph& g) {
    std::vector<AmbiguousEdge> out;
    for (const auto& e : g.edges())
        if (!e.directed()) out.push_back(AmbiguousEdge{{e.a, e.b}, 1.0, 0.0});
    return out;
}

namespace {

std::string outcome_of(const MixedGraph& g, const std::string& a, const std::string& b) {
    const auto m = g.marks(a, b);
    if (!m) return "absent";
    if (m->first == Mark::tail && m->second == Mark::arrow) return "forward";
    if (m->first == Mark::arrow && m->second == Mark::tail) return "backward";
    return std::string("marks:") + graph::to_string(m->first) + "," + graph::to_string(m->second);
}

}  // namespace

std::vector<MixedGraph> resample_runs(const data::Dataset& ds, const std::vector<std::string>& vars,
                                      const BackgroundKnowledge& bk, int k, double frac, std::uint64_t seed,
                                      const PcOptions& options) {
    if (k < 2) throw ValidationError("stability_resample: k must be >= 2");
    if (!(frac > 0.0 && frac <= 1.0)) throw ValidationError("stability_resample: frac must lie in (0, 1]");
    const std::size_t n = ds.rows();
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frac * static_cast<double>(n))));
    std::vector<MixedGraph> runs(static_cast<std::size_t>(k));
    parallel_for(runs.size(), default_jobs(), [&](std::size_t run) {
        Stream rng(derive_seed(seed, fnv1a("stability"), run));
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        for (std::size_t i = 0; i < m; ++i) std::swap(rows[i], rows[i + rng.below(n - i)]);
        rows.resize(m);
        std::sort(rows.begin(), rows.end());
        runs[run] = pc_learn_detailed(ds.select_rows(rows), vars, bk, options).cpdag;
    });
    return runs;
}

std::map<NamePair, double> stability_from_runs(const std::vector<MixedGraph>& runs) {
    std::set<NamePair> pairs;
    for (const auto& g : runs)
        for (const auto& e : g.edges()) pairs.insert({e.a, e.b});
    std::map<NamePair, double> out;
    for (const auto& [a, b] : pairs) {
        std::map<std::string, int> counts;
        for (const auto& g : runs) ++counts[outcome_of(g, a, b)];
        int modal = 0;
        for (const auto& [_, c] : counts) modal = std::max(modal, c);
        out[{a, b}] = 1.0 - static_cast<double>(modal) / static_cast<double>(runs.size());
    }
    return out;
}

std::map<NamePair, double> stability_resample(const data::Dataset& ds, const std::vector<std::string>& vars,
                                              const BackgroundKnowledge& bk, int k, double frac,
                                              std::uint64_t seed, const PcOptions& options) {
    return stability_from_runs(resample_runs(ds, vars, bk, k, frac, seed, options));
}

std::set<std::string> markov_blanket(const MixedGraph& g, const std::string& target) {
    std::set<std::string> out;
    for (const auto& n : g.neighbors(target)) out.insert(n);
    for (const auto& child : g.children(target))
        for (const auto& co : g.parents(child))
            if (co != target) out.insert(co);
    return out;
}

}  // namespace causeway::discovery
