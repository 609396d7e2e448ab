#include "causeway/intervene/intervene.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <span>

#include <boost/math/distributions/students_t.hpp>

#include "causeway/common.hpp"
#include "causeway/random.hpp"

namespace causeway::intervene {

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

/// Undirected hop distance from `source` in the skeleton; -1 if unreachable.
int hops(const MixedGraph& g, const std::string& source, const std::string& to) {
    if (!g.has_vertex(source) || !g.has_vertex(to)) return -1;
    std::map<std::string, int> dist{{source, 0}};
    std::deque<std::string> queue{source};
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        if (u == to) return dist[u];
        for (const auto& v : g.neighbors(u))
            if (!dist.contains(v)) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
    }
    return -1;
}

/// Bin codes for the pooled responses: one bin per distinct value when
/// there are at most `bins` of them, pooled quantile bins otherwise.
std::vector<int> pooled_codes(const std::vector<double>& pooled, int bins) {
    std::vector<double> distinct = pooled;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<int> codes(pooled.size());
    if (distinct.size() <= static_cast<std::size_t>(bins)) {
        for (std::size_t i = 0; i < pooled.size(); ++i)
            codes[i] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), pooled[i]) - distinct.begin());
        return codes;
    }
    const auto edges = data::quantile_edges(pooled, bins);
    for (std::size_t i = 0; i < pooled.size(); ++i) codes[i] = data::code_for(pooled[i], edges);
    return codes;
}

void check_level(double v, const char* what) {
    if (!std::isfinite(v)) throw ValidationError(std::string("script ") + what + " must be finite");
}

}  // namespace

std::vector<EdgeScore> score_edges(const std::vector<discovery::AmbiguousEdge>& ambiguous,
                                   const std::map<NamePair, double>& importance, double beta) {
    if (beta < 0.0) throw ValidationError("beta must be non-negative");
    std::vector<EdgeScore> out;
    for (const auto& a : ambiguous) {
        const auto key = graph::unordered_key(a.pair.first, a.pair.second);
        auto it = importance.find(key);
        if (it == importance.end()) it = importance.find(a.pair);
        if (it == importance.end())
            throw ValidationError("no importance for edge " + a.pair.first + " - " + a.pair.second);
        EdgeScore s;
        s.pair = a.pair;
        s.importance = it->second;
        s.uncertainty = a.uncertainty;
        s.stability = a.stability;
        s.beta = beta;
        s.score = s.importance * (s.uncertainty + beta * s.stability);
        out.push_back(s);
    }
    std::sort(out.begin(), out.end(), [](const EdgeScore& a, const EdgeScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.pair < b.pair;
    });
    return out;
}

double importance(const NamePair& edge, const data::Dataset& ds, const std::string& target,
                  const MixedGraph& reference, const std::vector<MixedGraph>& runs) {
    if (runs.empty()) throw ValidationError("importance needs at least one discovery run");
    const auto& [a, b] = edge;
    std::string nearer;
    if (a == target)
        nearer = b;
    else if (b == target)
        nearer = a;
    else {
        const int da = hops(reference, a, target), db = hops(reference, b, target);
        if (da >= 0 && (db < 0 || da < db || (da == db && a < b)))
            nearer = a;
        else if (db >= 0)
            nearer = b;
        else
            nearer = std::min(a, b);
    }
    const double corr = std::abs(pearson(ds.values(nearer), ds.values(target)));
    double present = 0.0;
    for (const auto& g : runs)
        if (g.has_vertex(a) && g.has_vertex(b) && g.adjacent(a, b)) present += 1.0;
    const double w = 0.5 * corr + 0.5 * present / static_cast<double>(runs.size());
    return std::clamp(w, 0.0, 1.0);
}

void validate(const InterventionScript& s) {
    if (s.id.empty()) throw ValidationError("script: empty id");
    if (s.knob.empty()) throw ValidationError("script " + s.id + ": empty knob");
    check_level(s.level, "level");
    check_level(s.reference, "reference level");
    if (s.level == s.reference && !s.placebo)
        throw ValidationError("script " + s.id + ": levels must differ (mark placebo scripts explicitly)");
    if (s.seeds.empty()) throw ValidationError("script " + s.id + ": no seeds");
    if (std::set<std::uint64_t>(s.seeds.begin(), s.seeds.end()).size() != s.seeds.size())
        throw ValidationError("script " + s.id + ": seeds must be distinct");
    if (s.replications < 1) throw ValidationError("script " + s.id + ": replications must be >= 1");
    if (s.configs.empty()) throw ValidationError("script " + s.id + ": no configurations");
}

InterventionScript script_from_json(const nlohmann::json& j) {
    auto field = [&](const char* name) -> const nlohmann::json& {
        if (!j.is_object() || !j.contains(name)) throw ValidationError(std::string("script: missing /") + name);
        return j.at(name);
    };
    InterventionScript s;
    try {
        s.id = field("id").get<std::string>();
        s.target = j.value("target", std::string());
        s.knob = field("knob").get<std::string>();
        const auto& levels = field("levels");
        if (!levels.is_array() || levels.size() != 2) throw ValidationError("script: /levels must hold [x, x']");
        s.level = levels[0].get<double>();
        s.reference = levels[1].get<double>();
        s.seeds = field("seeds").get<std::vector<std::uint64_t>>();
        s.replications = j.value("replications", 1);
        s.placebo = j.value("placebo", false);
        if (j.contains("configs")) {
            s.configs.clear();
            for (const auto& c : j.at("configs")) {
                if (!c.is_object()) throw ValidationError("script: /configs entries must be objects");
                sim::Settings settings;
                for (const auto& [k, v] : c.items()) settings.emplace_back(k, v.get<double>());
                s.configs.push_back(std::move(settings));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("script: ") + e.what());
    }
    validate(s);
    return s;
}

nlohmann::json to_json(const InterventionScript& s) {
    nlohmann::json configs = nlohmann::json::array();
    for (const auto& c : s.configs) {
        nlohmann::json o = nlohmann::json::object();
        for (const auto& [k, v] : c) o[k] = v;
        configs.push_back(o);
    }
    nlohmann::json j = {{"id", s.id},
                        {"target", s.target},
                        {"knob", s.knob},
                        {"levels", {s.level, s.reference}},
                        {"seeds", s.seeds},
                        {"replications", s.replications},
                        {"configs", configs}};
    if (s.placebo) j["placebo"] = true;
    return j;
}

PairedRun run_paired(const sim::Simulator& sim, const InterventionScript& script, int steps) {
    validate(script);
    PairedRun run;
    run.script = script.id;
    if (!sim.knob_valid(script.knob)) {
        run.infeasible = true;
        run.reason = "knob '" + script.knob + "' is not realizable in " + sim.world();
        log::warn("script " + script.id + ": " + run.reason);
        return run;
    }
    struct Job {
        std::size_t config;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < script.configs.size(); ++c)
        for (auto seed : script.seeds)
            for (int r = 0; r < script.replications; ++r)
                jobs.push_back({c, r == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(r))});
    run.pairs.resize(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), default_jobs(), [&](std::size_t i) {
        const auto& job = jobs[i];
        auto high = script.configs[job.config];
        auto low = high;
        high.emplace_back(script.knob, script.level);
        low.emplace_back(script.knob, script.reference);
        try {
            run.pairs[i] = {job.config, job.seed, sim::rollout(sim, job.seed, high, steps),
                            sim::rollout(sim, job.seed, low, steps)};
        } catch (const sim::InfeasibleKnob& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) {
            run.infeasible = true;
            run.reason = e;
            run.pairs.clear();
            log::warn("script " + script.id + " infeasible: " + e);
            break;
        }
    return run;
}

double response(const sim::RolloutLog& log, const std::string& name) {
    if (auto it = log.summary.find(name); it != log.summary.end()) return it->second;
    if (name == "y" && log.y) return *log.y;
    throw ValidationError("rollout log has no response '" + name + "'");
}

EffectEstimate estimate_effect(const std::vector<double>& high, const std::vector<double>& low, int bins) {
    if (high.size() != low.size()) throw ValidationError("estimate_effect: arms differ in size");
    if (high.size() < 20) throw ValidationError("estimate_effect needs at least 20 pairs");
    EffectEstimate e;
    const auto n = high.size();
    e.pairs = n;

    std::vector<double> pooled = high;
    pooled.insert(pooled.end(), low.begin(), low.end());
    const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
    if (*lo == *hi) return e;

    const auto codes = pooled_codes(pooled, bins);
    const int k = *std::max_element(codes.begin(), codes.end()) + 1;
    std::vector<long> ch(k, 0), cl(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++ch[codes[i]];
        ++cl[codes[n + i]];
    }
    long gap = 0;
    for (int b = 0; b < k; ++b) gap += std::abs(ch[b] - cl[b]);
    e.delta = std::clamp(0.5 * static_cast<double>(gap) / static_cast<double>(n), 0.0, 1.0);

    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = high[i] - low[i];
    const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double d : diff) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    e.mean_shift = mean;
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        // Common random numbers can make every difference identical.
        e.p_value = std::abs(mean) > 0.0 ? 0.0 : 1.0;
        return e;
    }
    const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    boost::math::students_t dist(static_cast<double>(n - 1));
    e.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
    return e;
}

EffectEstimate estimate_effect(const std::vector<PairedRollout>& pairs, const std::string& response_name, int bins) {
    std::vector<double> high, low;
    for (const auto& p : pairs) {
        high.push_back(response(p.high, response_name));
        low.push_back(response(p.low, response_name));
    }
    return estimate_effect(high, low, bins);
}

std::vector<EffectEstimate> effects_by_config(const PairedRun& run, std::size_t configs,
                                              const std::string& response_name) {
    std::vector<std::vector<PairedRollout>> split(configs);
    for (const auto& p : run.pairs) split.at(p.config).push_back(p);
    std::vector<EffectEstimate> out;
    for (const auto& s : split) out.push_back(estimate_effect(s, response_name));
    return out;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::confirmed: return "confirmed";
        case Verdict::refuted: return "refuted";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const char* to_string(Orientation o) {
    switch (o) {
        case Orientation::source_to_target: return "source_to_target";
        case Orientation::target_to_source: return "target_to_source";
        case Orientation::bidirectional: return "bidirectional";
        case Orientation::undetermined: return "undetermined";
    }
    return "undetermined";
}

CounterfactualResult adjudicate(const std::vector<EffectEstimate>& configs, double alpha, std::size_t min_pairs) {
    CounterfactualResult r;
    r.configs = configs;
    if (configs.empty()) return r;
    if (configs.size() < 2) log::debug("adjudicate: a single configuration gives weak consistency evidence");
    bool all_significant = true, all_null = true;
    int positive = 0, negative = 0;
    for (const auto& c : configs) {
        const bool significant = c.p_value < alpha;
        all_significant = all_significant && significant;
        all_null = all_null && !significant && c.pairs >= min_pairs;
        positive += c.mean_shift > 0.0 ? 1 : 0;
        negative += c.mean_shift < 0.0 ? 1 : 0;
    }
    const auto n = static_cast<int>(configs.size());
    if (all_significant && (positive == n || negative == n)) {
        r.verdict = Verdict::confirmed;
        r.orientation = Orientation::source_to_target;
    } else if (all_null) {
        r.verdict = Verdict::refuted;
    }
    return r;
}

EdgeAdjudication combine_probes(const NamePair& pair, const CounterfactualResult& forward,
                                const CounterfactualResult& reverse) {
    EdgeAdjudication a;
    a.pair = pair;
    a.forward = forward;
    a.reverse = reverse;
    const bool f = forward.verdict == Verdict::confirmed;
    const bool b = reverse.verdict == Verdict::confirmed;
    if (f && b) {
        a.verdict = Verdict::confirmed;
        a.orientation = Orientation::bidirectional;
    } else if (f) {
        a.verdict = Verdict::confirmed;
        a.orientation = Orientation::source_to_target;
    } else if (b) {
        a.verdict = Verdict::confirmed;
        a.orientation = Orientation::target_to_source;
    } else if (forward.verdict == Verdict::refuted && reverse.verdict == Verdict::refuted) {
        a.verdict = Verdict::refuted;
    }
    return a;
}

void record(discovery::BackgroundKnowledge& bk, const EdgeAdjudication& a) {
    const auto& [u, v] = a.pair;
    if (a.orientation == Orientation::source_to_target)
        bk.confirm(u, v);
    else if (a.orientation == Orientation::target_to_source)
        bk.confirm(v, u);
    if (a.forward.verdict == Verdict::refuted && a.orientation != Orientation::source_to_target) bk.forbid(u, v);
    if (a.reverse.verdict == Verdict::refuted && a.orientation != Orientation::target_to_source) bk.forbid(v, u);
}

EdgeAdjudication adjudicate_edge(const sim::Simulator& sim, const NamePair& pair, const InterventionScript& base,
                                 double alpha, int steps) {
    auto probe = [&](const std::string& source, const std::string& response_name) {
        auto script = base;
        script.id = base.id + ":" + source + "->" + response_name;
        script.target = source;
        script.knob = "do:" + source;
        const auto run = run_paired(sim, script, steps);
        if (run.infeasible) return CounterfactualResult{};
        return adjudicate(effects_by_config(run, script.configs.size(), response_name), alpha);
    };
    return combine_probes(pair, probe(pair.first, pair.second), probe(pair.second, pair.first));
}

std::vector<PoolLabel> label_pool(const sim::Simulator& sim, const std::vector<InterventionScript>& pool,
                                  const std::vector<std::uint64_t>& baseline_seeds, double alpha,
                                  const std::string& response_name, int steps) {
    if (pool.empty()) throw ValidationError("label_pool: empty pool");
    std::vector<PoolLabel> out;
    for (const auto& s : pool) {
        auto script = s;
        if (!baseline_seeds.empty()) script.seeds = baseline_seeds;
        script.configs = {s.configs.front()};
        PoolLabel label;
        label.id = s.id;
        const auto run = run_paired(sim, script, steps);
        if (run.infeasible) {
            label.infeasible = true;
        } else {
            const auto e = estimate_effect(run.pairs, response_name);
            label.p_value = e.p_value;
            label.mean_shift = e.mean_shift;
            label.success = e.p_value < alpha;
        }
        out.push_back(label);
    }
    return out;
}

nlohmann::json to_json(const EffectEstimate& e) {
    return {{"delta", e.delta}, {"mean_shift", e.mean_shift}, {"p_value", e.p_value}, {"pairs", e.pairs}};
}

nlohmann::json to_json(const EdgeAdjudication& a) {
    auto side = [](const CounterfactualResult& r) {
        nlohmann::json configs = nlohmann::json::array();
        for (const auto& c : r.configs) configs.push_back(to_json(c));
        return nlohmann::json{{"verdict", to_string(r.verdict)}, {"configs", configs}};
    };
    return {{"pair", {a.pair.first, a.pair.second}},
            {"verdict", to_string(a.verdict)},
            {"orientation", to_string(a.orientation)},
            {"forward", side(a.forward)},
            {"reverse", side(a.reverse)}};
}

}  // namespace causeway::intervene
