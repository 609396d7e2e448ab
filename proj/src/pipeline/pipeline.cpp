#include "causeway/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "causeway/common.hpp"
#include "causeway/data/factor.hpp"
#include "causeway/graph/serialize.hpp"
#include "causeway/random.hpp"

namespace causeway::pipeline {

using nlohmann::json;
using intervene::EdgeAdjudication;
using intervene::Orientation;
using intervene::Verdict;

namespace {

// Rejects unknown keys so that typos in a config never pass silently.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.contains(it.key())) throw ValidationError(where + "/" + it.key() + ": unknown field");
}

template <class T>
void read_number(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    const std::string path = where + "/" + key;
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ValidationError(path + ": expected an integer");
        out = v.get<T>();
    } else {
        if (!v.is_number()) throw ValidationError(path + ": expected a number");
        out = v.get<T>();
    }
}

void check_range(bool ok, const std::string& what) {
    if (!ok) throw ValidationError("pipeline config " + what);
}

json settings_json(const sim::Settings& s) {
    json out = json::array();
    for (const auto& [k, v] : s) out.push_back({k, v});
    return out;
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

Verdict parse_verdict(const std::string& s) {
    if (s == "confirmed") return Verdict::confirmed;
    if (s == "refuted") return Verdict::refuted;
    return Verdict::inconclusive;
}

Orientation parse_orientation(const std::string& s) {
    for (auto o : {Orientation::source_to_target, Orientation::target_to_source, Orientation::bidirectional})
        if (s == intervene::to_string(o)) return o;
    return Orientation::undetermined;
}

EdgeAdjudication adjudication_from_json(const json& j) {
    EdgeAdjudication a;
    a.pair = {j.at("pair").at(0).get<std::string>(), j.at("pair").at(1).get<std::string>()};
    a.verdict = parse_verdict(j.at("verdict").get<std::string>());
    a.orientation = parse_orientation(j.at("orientation").get<std::string>());
    auto side = [](const json& s) {
        intervene::CounterfactualResult r;
        r.verdict = parse_verdict(s.at("verdict").get<std::string>());
        for (const auto& c : s.at("configs")) {
            intervene::EffectEstimate e;
            e.delta = c.at("delta").get<double>();
            e.mean_shift = c.at("mean_shift").get<double>();
            e.p_value = c.at("p_value").get<double>();
            e.pairs = c.at("pairs").get<std::size_t>();
            r.configs.push_back(e);
        }
        return r;
    };
    a.forward = side(j.at("forward"));
    a.reverse = side(j.at("reverse"));
    return a;
}

std::vector<std::uint64_t> probe_seeds(const PipelineConfig& c) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < c.probe_seeds; ++i)
        seeds.push_back(derive_seed(c.seed, fnv1a("probe"), static_cast<std::uint64_t>(i)));
    return seeds;
}

intervene::InterventionScript probe_script(const PipelineConfig& c) {
    intervene::InterventionScript s;
    s.id = "probe";
    s.knob = "do:";
    s.level = c.probe_level;
    s.reference = c.probe_reference;
    s.seeds = probe_seeds(c);
    s.replications = c.probe_replications;
    s.configs = c.probe_configs;
    return s;
}

// Rollouts one direction of a probe costs: a high and a low arm per
// configuration, seed and replication.
long probe_cost(const PipelineConfig& c) {
    return 2L * c.probe_seeds * c.probe_replications * static_cast<long>(c.probe_configs.size());
}

std::string pair_text(const graph::NamePair& p) { return p.first + "--" + p.second; }

// Probes one pair if a knob exists for it and the budget allows. Returns
// false once the budget is exhausted.
bool probe_pair(LoopState& state, const graph::NamePair& pair, const sim::Simulator& sim,
                const PipelineConfig& config, std::vector<std::string>* probed_log) {
    const bool f = sim.knob_valid("do:" + pair.first), r = sim.knob_valid("do:" + pair.second);
    state.probed.insert(graph::unordered_key(pair.first, pair.second));
    if (!f && !r) {
        state.notes.push_back("no do: knob for " + pair_text(pair) + "; left to observational data");
        return true;
    }
    const long cost = probe_cost(config) * ((f ? 1 : 0) + (r ? 1 : 0));
    if (state.rollouts_used + cost > config.rollout_budget) {
        state.budget_exhausted = true;
        state.probed.erase(graph::unordered_key(pair.first, pair.second));
        return false;
    }
    state.rollouts_used += cost;
    auto adj = intervene::adjudicate_edge(sim, pair, probe_script(config), config.adjudication_alpha, config.steps);
    auto bk = state.bk;
    intervene::record(bk, adj);
    if (bk.conflicts().empty())
        state.bk = std::move(bk);
    else
        state.notes.push_back("adjudication of " + pair_text(pair) + " conflicts with recorded knowledge; not recorded");
    state.adjudications.push_back(std::move(adj));
    if (probed_log) probed_log->push_back(pair_text(pair));
    return true;
}

discovery::PcOptions pc_options(const PipelineConfig& c) {
    discovery::PcOptions o;
    o.alpha = c.alpha;
    o.max_cond = c.max_cond;
    o.bins = c.bins;
    return o;
}

refine::RefineOptions refine_options(const PipelineConfig& c, int slow_round) {
    auto o = c.refine;
    o.bins = c.bins;
    o.seed = derive_seed(c.seed, fnv1a("refine"), static_cast<std::uint64_t>(slow_round));
    return o;
}

std::vector<data::FactorSpec> worldview_specs(const hypothesis::Worldview& w, const data::Dataset& ds) {
    std::vector<data::FactorSpec> specs;
    for (const auto& v : w.variables)
        if (v.factor && ds.has(v.name) && ds.column(v.name).provenance == data::Provenance::constructed)
            specs.push_back(*v.factor);
    return specs;
}

json graph_json(const MixedGraph& g) { return graph::to_json(g); }

}  // namespace

json PipelineConfig::to_json() const {
    json configs = json::array();
    for (const auto& s : probe_configs) configs.push_back(settings_json(s));
    return {{"target", target},
            {"seed", seed},
            {"alpha", alpha},
            {"bins", bins},
            {"max_cond", max_cond},
            {"refine",
             {{"holdout_frac", refine.holdout_frac},
              {"worst_fraction", refine.worst_fraction},
              {"tau", refine.tau},
              {"alpha", refine.alpha},
              {"penalty", refine.penalty}}},
            {"max_refine_rounds", max_refine_rounds},
            {"epsilon", epsilon},
            {"beta", beta},
            {"top_k", top_k},
            {"score_floor", score_floor},
            {"max_fast_rounds", max_fast_rounds},
            {"max_slow_rounds", max_slow_rounds},
            {"rollout_budget", rollout_budget},
            {"stability_runs", stability_runs},
            {"stability_frac", stability_frac},
            {"probe_seeds", probe_seeds},
            {"probe_replications", probe_replications},
            {"probe_level", probe_level},
            {"probe_reference", probe_reference},
            {"probe_configs", configs},
            {"adjudication_alpha", adjudication_alpha},
            {"steps", steps},
            {"shortlist", shortlist},
            {"restart", restart}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    static const std::set<std::string> keys{
        "target",          "seed",          "alpha",           "bins",          "max_cond",
        "refine",          "max_refine_rounds", "epsilon",     "beta",          "top_k",
        "score_floor",     "max_fast_rounds", "max_slow_rounds", "rollout_budget", "stability_runs",
        "stability_frac",  "probe_seeds",   "probe_replications", "probe_level", "probe_reference",
        "probe_configs",   "adjudication_alpha", "steps",      "shortlist",     "restart"};
    check_keys(j, keys, "");
    PipelineConfig c;
    if (j.contains("target")) {
        if (!j["target"].is_string()) throw ValidationError("/target: expected a string");
        c.target = j["target"].get<std::string>();
    }
    read_number(j, "seed", c.seed, "");
    read_number(j, "alpha", c.alpha, "");
    read_number(j, "bins", c.bins, "");
    read_number(j, "max_cond", c.max_cond, "");
    if (j.contains("refine")) {
        const auto& r = j["refine"];
        check_keys(r, {"holdout_frac", "worst_fraction", "tau", "alpha", "penalty"}, "/refine");
        read_number(r, "holdout_frac", c.refine.holdout_frac, "/refine");
        read_number(r, "worst_fraction", c.refine.worst_fraction, "/refine");
        read_number(r, "tau", c.refine.tau, "/refine");
        read_number(r, "alpha", c.refine.alpha, "/refine");
        read_number(r, "penalty", c.refine.penalty, "/refine");
    }
    read_number(j, "max_refine_rounds", c.max_refine_rounds, "");
    read_number(j, "epsilon", c.epsilon, "");
    read_number(j, "beta", c.beta, "");
    read_number(j, "top_k", c.top_k, "");
    read_number(j, "score_floor", c.score_floor, "");
    read_number(j, "max_fast_rounds", c.max_fast_rounds, "");
    read_number(j, "max_slow_rounds", c.max_slow_rounds, "");
    read_number(j, "rollout_budget", c.rollout_budget, "");
    read_number(j, "stability_runs", c.stability_runs, "");
    read_number(j, "stability_frac", c.stability_frac, "");
    read_number(j, "probe_seeds", c.probe_seeds, "");
    read_number(j, "probe_replications", c.probe_replications, "");
    read_number(j, "probe_level", c.probe_level, "");
    read_number(j, "probe_reference", c.probe_reference, "");
    if (j.contains("probe_configs")) {
        const auto& pc = j["probe_configs"];
        if (!pc.is_array()) throw ValidationError("/probe_configs: expected an array");
        c.probe_configs.clear();
        for (std::size_t i = 0; i < pc.size(); ++i) {
            const std::string where = "/probe_configs/" + std::to_string(i);
            if (!pc[i].is_array()) throw ValidationError(where + ": expected an array of [knob, value]");
            sim::Settings s;
            for (std::size_t k = 0; k < pc[i].size(); ++k) {
                const auto& kv = pc[i][k];
                if (!kv.is_array() || kv.size() != 2 || !kv[0].is_string() || !kv[1].is_number())
                    throw ValidationError(where + "/" + std::to_string(k) + ": expected [knob, value]");
                s.emplace_back(kv[0].get<std::string>(), kv[1].get<double>());
            }
            c.probe_configs.push_back(std::move(s));
        }
    }
    read_number(j, "adjudication_alpha", c.adjudication_alpha, "");
    read_number(j, "steps", c.steps, "");
    read_number(j, "shortlist", c.shortlist, "");
    read_number(j, "restart", c.restart, "");
    c.validate();
    return c;
}

void PipelineConfig::validate() const {
    auto unit = [](double x) { return x > 0.0 && x < 1.0; };
    check_range(unit(alpha), "/alpha must lie in (0, 1)");
    check_range(bins >= 2, "/bins must be >= 2");
    check_range(max_cond >= 0, "/max_cond must be >= 0");
    check_range(unit(refine.holdout_frac), "/refine/holdout_frac must lie in (0, 1)");
    check_range(refine.worst_fraction > 0.0 && refine.worst_fraction <= 1.0,
                "/refine/worst_fraction must lie in (0, 1]");
    check_range(unit(refine.alpha), "/refine/alpha must lie in (0, 1)");
    check_range(refine.penalty >= 0.0, "/refine/penalty must be >= 0");
    check_range(max_refine_rounds >= 1, "/max_refine_rounds must be >= 1");
    check_range(epsilon >= 0.0, "/epsilon must be >= 0");
    check_range(beta >= 0.0, "/beta must be >= 0");
    check_range(top_k >= 1, "/top_k must be >= 1");
    check_range(score_floor >= 0.0, "/score_floor must be >= 0");
    check_range(max_fast_rounds >= 1, "/max_fast_rounds must be >= 1");
    check_range(max_slow_rounds >= 1, "/max_slow_rounds must be >= 1");
    check_range(rollout_budget >= 0, "/rollout_budget must be >= 0");
    check_range(stability_runs >= 1, "/stability_runs must be >= 1");
    check_range(unit(stability_frac), "/stability_frac must lie in (0, 1)");
    check_range(probe_seeds >= 20, "/probe_seeds must be >= 20 (paired test minimum)");
    check_range(probe_replications >= 1, "/probe_replications must be >= 1");
    check_range(probe_level != probe_reference, "/probe_level must differ from /probe_reference");
    check_range(!probe_configs.empty(), "/probe_configs must not be empty");
    check_range(unit(adjudication_alpha), "/adjudication_alpha must lie in (0, 1)");
    check_range(steps >= 0, "/steps must be >= 0");
    check_range(shortlist >= 1, "/shortlist must be >= 1");
    check_range(unit(restart), "/restart must lie in (0, 1)");
}

std::vector<std::string> prepare_variables(const hypothesis::Worldview& w, data::Dataset& ds, const std::string& target,
                                           std::vector<std::string>* notes) {
    if (!ds.has(target)) throw ValidationError("target '" + target + "' is not a dataset column");
    std::set<std::string> usable{target};
    std::vector<const hypothesis::Variable*> pending;
    for (const auto& v : w.variables) {
        if (v.name == target) continue;
        if (ds.has(v.name))
            usable.insert(v.name);
        else if (v.factor)
            pending.push_back(&v);
        else if (notes)
            notes->push_back("variable " + v.name + " is neither logged nor constructible; skipped");
    }
    // Factors may build on each other: materialize until no progress.
    for (bool progress = true; progress && !pending.empty();) {
        progress = false;
        for (auto it = pending.begin(); it != pending.end();) {
            const auto& spec = *(*it)->factor;
            const bool ready = std::all_of(spec.inputs.begin(), spec.inputs.end(),
                                           [&](const std::string& in) { return ds.has(in); });
            if (!ready) {
                ++it;
                continue;
            }
            try {
                ds = data::materialize_factor(ds, spec);
                usable.insert(spec.name);
            } catch (const ValidationError& e) {
                if (notes) notes->push_back("factor " + spec.name + " rejected: " + e.what());
            }
            it = pending.erase(it);
            progress = true;
        }
    }
    for (const auto* v : pending)
        if (notes) notes->push_back("factor " + v->name + " has inputs that are not available; skipped");
    return {usable.begin(), usable.end()};
}

void fast_loop(LoopState& state, data::Dataset& ds, const sim::Simulator& sim, const PipelineConfig& config) {
    const auto& target = state.target;
    state.variables = prepare_variables(state.worldview, ds, target, &state.notes);
    std::vector<refine::Candidate> candidates;
    for (const auto& v : state.variables)
        if (v != target) candidates.push_back({v, std::nullopt});

    // Refinement from the empty set until the active set stops moving. It
    // does not read the background knowledge, so later iterations reuse it.
    const auto ropts = refine_options(config, state.slow_round);
    state.refinement = refine::initial_state(ds, target, {}, ropts);
    for (int r = 0; r < config.max_refine_rounds; ++r) {
        auto next = refine::refine_round(state.refinement, candidates, ds, target, ropts);
        const bool settled = next.active == state.refinement.active;
        state.refinement = std::move(next);
        auto record = refine::round_record(state.refinement);
        record["slow_round"] = state.slow_round;
        state.refinement_rounds.push_back(std::move(record));
        if (settled) break;
    }
    state.boundary = as_set(state.refinement.boundary);

    const auto popts = pc_options(config);
    std::optional<std::pair<std::set<std::string>, std::vector<graph::Edge>>> previous;
    bool dirty = false;
    for (int it = 0; it < config.max_fast_rounds; ++it) {
        FastIteration rec;
        rec.slow_round = state.slow_round;
        rec.iteration = it;
        rec.boundary = state.refinement.boundary;
        state.cpdag = discovery::pc_learn_detailed(ds, state.variables, state.bk, popts).cpdag;
        dirty = false;
        rec.edges = state.cpdag.edge_count();
        auto signature = std::make_pair(state.boundary, state.cpdag.edges());
        const bool stable = previous && *previous == signature;
        previous = std::move(signature);

        auto finish = [&](const std::string& why) {
            rec.stop = why;
            state.trace.push_back(rec);
        };
        if (stable) {
            finish("stable");
            break;
        }
        std::vector<discovery::AmbiguousEdge> open;
        for (const auto& a : discovery::ambiguous_edges(state.cpdag))
            if (!state.probed.contains(graph::unordered_key(a.pair.first, a.pair.second))) open.push_back(a);
        rec.ambiguous = open.size();
        if (open.empty()) {
            finish("no ambiguous edges left");
            break;
        }
        if (state.rollouts_used + probe_cost(config) > config.rollout_budget) {
            state.budget_exhausted = true;
            finish("rollout budget exhausted");
            break;
        }
        const auto runs = discovery::resample_runs(
            ds, state.variables, state.bk, config.stability_runs, config.stability_frac,
            derive_seed(config.seed, fnv1a("stability"), static_cast<std::uint64_t>(state.slow_round),
                        static_cast<std::uint64_t>(it)),
            popts);
        const auto sigma = discovery::stability_from_runs(runs);
        std::map<graph::NamePair, double> weight;
        for (auto& a : open) {
            const auto key = graph::unordered_key(a.pair.first, a.pair.second);
            if (auto s = sigma.find(key); s != sigma.end()) a.stability = s->second;
            weight[a.pair] = intervene::importance(a.pair, ds, target, state.cpdag, runs);
        }
        rec.scores = intervene::score_edges(open, weight, config.beta);
        if (rec.scores.front().score < config.score_floor) {
            finish("best edge score below floor");
            break;
        }
        bool exhausted = false;
        for (int k = 0; k < config.top_k && k < static_cast<int>(rec.scores.size()); ++k) {
            if (!probe_pair(state, rec.scores[k].pair, sim, config, &rec.probed)) {
                exhausted = true;
                break;
            }
            dirty = true;
        }
        if (exhausted) {
            rec.stop = "rollout budget exhausted";
            state.trace.push_back(rec);
            break;
        }
        state.trace.push_back(rec);
    }
    if (dirty) state.cpdag = discovery::pc_learn_detailed(ds, state.variables, state.bk, popts).cpdag;
}

bool slow_loop(LoopState& state, hypothesis::Provider& provider, data::Dataset& ds, const sim::Simulator& sim,
               const PipelineConfig& config) {
    (void)ds;
    // Mechanism arrows the learned graph reverses are probed directly.
    for (const auto& e : state.worldview.mechanism.edges()) {
        if (!e.directed()) continue;
        const auto &u = e.source(), &v = e.target();
        if (!state.cpdag.has_vertex(u) || !state.cpdag.has_vertex(v) || !state.cpdag.has_directed(v, u)) continue;
        if (state.probed.contains(graph::unordered_key(u, v))) continue;
        if (!probe_pair(state, {u, v}, sim, config, nullptr)) break;
    }

    std::vector<const EdgeAdjudication*> against;
    for (const auto& a : state.adjudications)
        if (a.verdict != Verdict::inconclusive && hypothesis::contradicts(state.worldview, a)) against.push_back(&a);

    if (!against.empty() && state.slow_round + 1 < config.max_slow_rounds) {
        auto revised = state.worldview;
        for (const auto* a : against) {
            if (!hypothesis::contradicts(revised, *a)) continue;
            revised = provider.revise(revised, *a);
            state.revisions.push_back("round " + std::to_string(state.slow_round) + ": " + revised.id +
                                      " revised on " + pair_text(a->pair) + " (" + intervene::to_string(a->verdict) +
                                      ", " + intervene::to_string(a->orientation) + ")");
        }
        bool replaced = false;
        for (auto& w : state.worldviews)
            if (w.id == state.worldview.id) {
                w = revised;
                replaced = true;
            }
        if (!replaced) state.worldviews.push_back(revised);
        state.worldview = provider.integrate(state.worldviews);
        state.selections.push_back(state.worldview.id);
        ++state.slow_round;
        return true;
    }
    if (!against.empty())
        state.notes.push_back("slow-round cap reached with " + std::to_string(against.size()) +
                              " contradiction(s) outstanding: not converged");
    state.converged = against.empty();

    // E_Y: the constrained mechanism graph cut to root-to-boundary paths,
    // joined to the target through the learned local graph.
    const auto gw = explain::enforce_constraints(state.worldview.mechanism, state.bk);
    std::set<std::string> roots;
    for (const auto& r : state.worldview.effective_roots())
        if (gw.has_vertex(r)) roots.insert(r);
    const auto conn = explain::conn_min(gw, roots, state.boundary, state.bk);
    auto local_keep = state.boundary;
    local_keep.insert(state.target);
    auto e = explain::assemble_e_y(conn, state.boundary, state.target, state.cpdag.induced(local_keep), roots,
                                   state.bk);
    e.source = gw;
    state.e_y = std::move(e);
    return false;
}

json evaluate(const MixedGraph& learned, const std::set<std::string>& boundary, const std::string& target,
              const GroundTruth& truth) {
    std::set<std::string> keep;
    for (const auto& n : truth.dag.names())
        if (learned.has_vertex(n)) keep.insert(n);
    auto pred = learned.induced(keep);
    for (const auto& n : truth.dag.names())
        if (!pred.has_vertex(n)) pred.add_vertex(n);
    return {{"factors", eval::to_json(eval::categorize_factors(boundary, truth.boundary, truth.ancestors))},
            {"ancestors", eval::to_json(eval::ancestor_f1(pred, truth.dag, target))},
            {"structure", eval::to_json(eval::structure_report(pred, truth.dag))}};
}

json checkpoint_json(const LoopState& state) {
    json worldviews = json::array();
    for (const auto& w : state.worldviews) worldviews.push_back(hypothesis::to_json(w));
    json adjudications = json::array();
    for (const auto& a : state.adjudications) adjudications.push_back(intervene::to_json(a));
    json probed = json::array();
    for (const auto& [a, b] : state.probed) probed.push_back({a, b});
    return {{"schema", "causeway.checkpoint/1"},
            {"slow_round", state.slow_round},
            {"target", state.target},
            {"worldviews", worldviews},
            {"worldview", hypothesis::to_json(state.worldview)},
            {"background", discovery::to_json(state.bk)},
            {"adjudications", adjudications},
            {"probed", probed},
            {"rollouts_used", state.rollouts_used},
            {"revisions", state.revisions},
            {"selections", state.selections}};
}

namespace {

void restore(LoopState& state, const json& j) {
    try {
        if (j.at("schema") != "causeway.checkpoint/1") throw ValidationError("checkpoint: unsupported schema");
        state.slow_round = j.at("slow_round").get<int>();
        state.target = j.at("target").get<std::string>();
        state.worldviews.clear();
        for (const auto& w : j.at("worldviews")) state.worldviews.push_back(hypothesis::worldview_from_json(w));
        state.worldview = hypothesis::worldview_from_json(j.at("worldview"));
        state.bk = discovery::bk_from_json(j.at("background"));
        state.adjudications.clear();
        for (const auto& a : j.at("adjudications")) state.adjudications.push_back(adjudication_from_json(a));
        state.probed.clear();
        for (const auto& p : j.at("probed")) state.probed.insert({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
        state.rollouts_used = j.at("rollouts_used").get<long>();
        state.revisions = j.at("revisions").get<std::vector<std::string>>();
        state.selections = j.at("selections").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint: ") + e.what());
    }
}

}  // namespace

PipelineResult run_pipeline(const sim::Simulator& sim, hypothesis::Provider& provider, data::Dataset ds,
                            const std::string& query, const PipelineConfig& config,
                            const std::optional<GroundTruth>& truth, const Checkpoint& checkpoint,
                            const std::optional<json>& resume) {
    config.validate();
    PipelineResult result;
    auto& state = result.state;
    auto save = [&] {
        if (checkpoint) checkpoint(checkpoint_json(state));
    };

    if (resume) {
        restore(state, *resume);
    } else {
        state.worldviews = provider.parse(query, {});
        if (state.worldviews.empty()) throw ValidationError("provider " + provider.name() + " returned no worldviews");
        state.worldview = provider.integrate(state.worldviews);
        state.selections.push_back(state.worldview.id);
        state.target = config.target.empty() ? state.worldview.target : config.target;
        if (state.target.empty()) throw ValidationError("no target: set it in the config or the worldview");
    }

    try {
        while (true) {
            fast_loop(state, ds, sim, config);
            save();
            if (!slow_loop(state, provider, ds, sim, config)) break;
            save();
        }
    } catch (...) {
        save();
        throw;
    }
    save();

    data::SupportSet supports;
    {
        std::vector<std::string> logged;
        for (const auto& c : ds.columns())
            if (c.provenance != data::Provenance::constructed) logged.push_back(c.name);
        supports = data::build_supports(logged, worldview_specs(state.worldview, ds));
    }
    result.projected = explain::project(state.cpdag, supports);
    result.minimality = explain::verify_minimality(*state.e_y);
    result.pc_estimate = refine::estimate_pc(state.refinement.f_trajectory, config.epsilon);

    json trace = json::array();
    for (const auto& t : state.trace) {
        json scores = json::array();
        for (const auto& s : t.scores)
            scores.push_back({{"pair", {s.pair.first, s.pair.second}},
                              {"importance", s.importance},
                              {"uncertainty", s.uncertainty},
                              {"stability", s.stability},
                              {"score", s.score}});
        trace.push_back({{"slow_round", t.slow_round},
                         {"iteration", t.iteration},
                         {"boundary", t.boundary},
                         {"edges", t.edges},
                         {"ambiguous", t.ambiguous},
                         {"scores", scores},
                         {"probed", t.probed},
                         {"stop", t.stop}});
    }
    json adjudications = json::array();
    for (const auto& a : state.adjudications) adjudications.push_back(intervene::to_json(a));
    const auto cfg = config.to_json();

    json& r = result.report;
    r["schema"] = kReportSchema;
    r["tool_version"] = std::string(kToolVersion);
    r["config_hash"] = hex64(fnv1a(cfg.dump()));
    r["config"] = cfg;
    r["world"] = sim.world();
    r["provider"] = provider.name();
    r["query"] = query;
    r["target"] = state.target;
    r["variables"] = state.variables;
    r["markov_boundary"] = state.boundary;
    r["graph_blanket"] = discovery::markov_blanket(state.cpdag, state.target);
    r["refinement"] = {{"rounds", state.refinement_rounds},
                       {"f_trajectory", state.refinement.f_trajectory},
                       {"p_hat", result.pc_estimate.first},
                       {"c_hat", result.pc_estimate.second}};
    r["fast_loop"] = trace;
    r["adjudications"] = adjudications;
    r["background"] = discovery::to_json(state.bk);
    r["selections"] = state.selections;
    r["revisions"] = state.revisions;
    r["slow_rounds"] = state.slow_round + 1;
    r["converged"] = state.converged;
    r["rollouts_used"] = state.rollouts_used;
    r["budget_exhausted"] = state.budget_exhausted;
    r["worldview"] = hypothesis::to_json(state.worldview);
    r["cpdag"] = graph_json(state.cpdag);
    r["projected"] = graph_json(result.projected);
    r["e_y"] = explain::to_json(*state.e_y);
    r["minimality"] = {{"pass", result.minimality.pass}, {"violations", result.minimality.violations}};
    r["notes"] = state.notes;
    if (truth) r["evaluation"] = evaluate(state.cpdag, state.boundary, state.target, *truth);
    return result;
}

}  // namespace causeway::pipeline
