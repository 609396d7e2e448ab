#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/data/dataset.hpp"
#include "causeway/discovery/pc.hpp"
#include "causeway/graph/mixed_graph.hpp"
#include "causeway/sim/simulator.hpp"

namespace causeway::intervene {

using graph::MixedGraph;
using graph::NamePair;

inline constexpr double kDefaultBeta = 0.5;
/// Pairs per configuration needed before a null result counts as a refutation.
inline constexpr std::size_t kRefutePairs = 100;

struct EdgeScore {
    NamePair pair;
    double importance = 0.0;
    double uncertainty = 0.0;
    double stability = 0.0;
    double beta = kDefaultBeta;
    double score = 0.0;
};

/// score = w * (u + beta * sigma), sorted by descending score then pair.
/// Throws ValidationError when an edge has no importance entry.
std::vector<EdgeScore> score_edges(const std::vector<discovery::AmbiguousEdge>& ambiguous,
                                   const std::map<NamePair, double>& importance, double beta = kDefaultBeta);

/// w = 0.5 |corr(v, Y)| + 0.5 * share of runs in which the pair is adjacent,
/// where v is the endpoint nearer to Y in `reference` (the other endpoint
/// when the edge touches Y). Clamped to [0, 1].
double importance(const NamePair& edge, const data::Dataset& ds, const std::string& target,
                  const MixedGraph& reference, const std::vector<MixedGraph>& runs);

struct InterventionScript {
    std::string id;
    /// The vertex v(s) the script acts on.
    std::string target;
    std::string knob;
    double level = 1.0;
    double reference = 0.0;
    std::vector<std::uint64_t> seeds;
    int replications = 1;
    /// Simulator parameter variants; each is applied before the knob.
    std::vector<sim::Settings> configs{{}};
    /// Declares x = x' on purpose (a sanity or placebo script).
    bool placebo = false;
};

/// Throws ValidationError on an empty id, knob or seed list, repeated seeds,
/// replications < 1, no configurations, or x = x' without `placebo`.
void validate(const InterventionScript& script);
InterventionScript script_from_json(const nlohmann::json& j);
nlohmann::json to_json(const InterventionScript& script);

struct PairedRollout {
    std::size_t config = 0;
    std::uint64_t seed = 0;
    sim::RolloutLog high;
    sim::RolloutLog low;
};

struct PairedRun {
    std::string script;
    bool infeasible = false;
    std::string reason;
    std::vector<PairedRollout> pairs;
};

/// For every configuration, seed and replication, two rollouts that share
/// the rollout seed and differ only in the knob level. A knob the simulator
/// cannot realize marks the run infeasible.
PairedRun run_paired(const sim::Simulator& sim, const InterventionScript& script, int steps = 0);

/// Named run-level response of a log: a summary feature, or the outcome
/// when `name` is "y" and no feature of that name exists.
double response(const sim::RolloutLog& log, const std::string& name);

struct EffectEstimate {
    /// Total-variation distance between the arms' binned responses.
    double delta = 0.0;
    /// Mean of (high - low).
    double mean_shift = 0.0;
    double p_value = 1.0;
    std::size_t pairs = 0;
};

/// Throws ValidationError with fewer than 20 pairs or unequal arms.
EffectEstimate estimate_effect(const std::vector<double>& high, const std::vector<double>& low, int bins = 5);
EffectEstimate estimate_effect(const std::vector<PairedRollout>& pairs, const std::string& response_name,
                               int bins = 5);

/// Per-configuration effects of a paired run.
std::vector<EffectEstimate> effects_by_config(const PairedRun& run, std::size_t configs,
                                              const std::string& response_name);

enum class Verdict { confirmed, refuted, inconclusive };
enum class Orientation { source_to_target, target_to_source, bidirectional, undetermined };
const char* to_string(Verdict v);
const char* to_string(Orientation o);

struct CounterfactualResult {
    std::vector<EffectEstimate> configs;
    Verdict verdict = Verdict::inconclusive;
    Orientation orientation = Orientation::undetermined;
};

/// Confirmed iff every configuration has p < alpha with one shared sign of
/// the mean shift; refuted iff every configuration has p >= alpha on at
/// least `min_pairs` pairs; inconclusive otherwise. A confirmed probe is
/// oriented source_to_target (the clamped endpoint moved the response).
CounterfactualResult adjudicate(const std::vector<EffectEstimate>& configs, double alpha = 0.05,
                                std::size_t min_pairs = kRefutePairs);

struct EdgeAdjudication {
    NamePair pair;
    CounterfactualResult forward;
    CounterfactualResult reverse;
    Verdict verdict = Verdict::inconclusive;
    Orientation orientation = Orientation::undetermined;
};

/// Combines a probe clamping pair.first with one clamping pair.second.
EdgeAdjudication combine_probes(const NamePair& pair, const CounterfactualResult& forward,
                                const CounterfactualResult& reverse);

/// Confirmed directions become required arrows and refuted directions are
/// forbidden.
void record(discovery::BackgroundKnowledge& bk, const EdgeAdjudication& adjudication);

/// Probes both directions of an edge on the simulator with `do:` clamps.
EdgeAdjudication adjudicate_edge(const sim::Simulator& sim, const NamePair& pair, const InterventionScript& base,
                                 double alpha = 0.05, int steps = 0);

struct PoolLabel {
    std::string id;
    bool success = false;
    bool infeasible = false;
    double p_value = 1.0;
    double mean_shift = 0.0;
};

/// Labels each script by a paired test of the response at level x against
/// the reference level x' (the no-intervention setting of the knob), on the
/// baseline seeds. Independent of any discovery method.
std::vector<PoolLabel> label_pool(const sim::Simulator& sim, const std::vector<InterventionScript>& pool,
                                  const std::vector<std::uint64_t>& baseline_seeds, double alpha = 0.05,
                                  const std::string& response_name = "y", int steps = 0);

nlohmann::json to_json(const EffectEstimate& e);
nlohmann::json to_json(const EdgeAdjudication& a);

}  // namespace causeway::intervene
