#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/data/dataset.hpp"
#include "causeway/discovery/pc.hpp"
#include "causeway/eval/metrics.hpp"
#include "causeway/explain/explain.hpp"
#include "causeway/hypothesis/provider.hpp"
#include "causeway/hypothesis/worldview.hpp"
#include "causeway/intervene/intervene.hpp"
#include "causeway/refine/refine.hpp"
#include "causeway/sim/simulator.hpp"

namespace causeway::pipeline {

using graph::MixedGraph;

inline constexpr const char* kReportSchema = "causeway.report/1";

struct PipelineConfig {
    /// Outcome variable; defaults to the decision worldview's target.
    std::string target;
    std::uint64_t seed = 0;
    /// CI level shared by discovery and pruning.
    double alpha = 0.01;
    int bins = 5;
    int max_cond = 3;
    /// Pruning shares the discovery level unless set explicitly.
    refine::RefineOptions refine{.alpha = 0.01};
    int max_refine_rounds = 6;
    /// Threshold epsilon for (p-hat, C-hat).
    double epsilon = 0.01;
    double beta = intervene::kDefaultBeta;
    /// Interventions per fast iteration.
    int top_k = 3;
    /// Below this best edge score the counterfactuals are uninformative.
    double score_floor = 0.05;
    int max_fast_rounds = 5;
    int max_slow_rounds = 5;
    /// Total rollouts the run may spend on probes.
    long rollout_budget = 20000;
    int stability_runs = 6;
    double stability_frac = 0.5;
    /// Probe design: seeds per configuration and the two clamp levels.
    int probe_seeds = 100;
    int probe_replications = 1;
    double probe_level = 1.0;
    double probe_reference = 0.0;
    std::vector<sim::Settings> probe_configs{{}};
    double adjudication_alpha = 0.05;
    /// Rollout length (0 = the simulator default).
    int steps = 0;
    int shortlist = hypothesis::kDefaultShortlist;
    double restart = eval::kDefaultRestart;

    nlohmann::json to_json() const;
    /// Unknown keys and out-of-range values raise ValidationError with a
    /// pointer to the field.
    static PipelineConfig from_json(const nlohmann::json& j);
    void validate() const;
};

struct FastIteration {
    int slow_round = 0;
    int iteration = 0;
    std::vector<std::string> boundary;
    std::size_t edges = 0;
    std::size_t ambiguous = 0;
    std::vector<intervene::EdgeScore> scores;
    std::vector<std::string> probed;
    std::string stop;
};

/// Everything the loops carry between rounds.
struct LoopState {
    int slow_round = 0;
    std::vector<hypothesis::Worldview> worldviews;
    hypothesis::Worldview worldview;
    std::string target;
    std::vector<std::string> variables;
    refine::RefinementState refinement;
    /// One record per executed refinement round, tagged with the slow round.
    std::vector<nlohmann::json> refinement_rounds;
    MixedGraph cpdag;
    discovery::BackgroundKnowledge bk;
    std::vector<intervene::EdgeAdjudication> adjudications;
    std::set<graph::NamePair> probed;
    long rollouts_used = 0;
    bool budget_exhausted = false;
    std::vector<FastIteration> trace;
    std::vector<std::string> revisions;
    std::vector<std::string> selections;
    std::set<std::string> boundary;
    std::optional<explain::ExplanatorySubgraph> e_y;
    bool converged = false;
    std::vector<std::string> notes;
};

/// Ground truth for evaluation.
struct GroundTruth {
    MixedGraph dag;
    std::set<std::string> boundary;
    std::set<std::string> ancestors;
};

struct PipelineResult {
    LoopState state;
    /// Learned graph projected onto the logged variables.
    MixedGraph projected;
    explain::MinimalityReport minimality;
    std::pair<double, double> pc_estimate{0.0, 0.0};
    nlohmann::json report;
};

using Checkpoint = std::function<void(const nlohmann::json&)>;

/// Materializes constructible worldview variables into `ds` and returns the
/// variables available for discovery (target included).
std::vector<std::string> prepare_variables(const hypothesis::Worldview& w, data::Dataset& ds, const std::string& target,
                                           std::vector<std::string>* notes = nullptr);

/// Refinement to a stable boundary, then rounds of discovery, edge scoring
/// and paired probes until the graph and boundary are unchanged twice in a
/// row, the best score drops below the floor, or the budget runs out.
void fast_loop(LoopState& state, data::Dataset& ds, const sim::Simulator& sim, const PipelineConfig& config);

/// Probes mechanism arrows that the learned graph orients the other way.
/// Contradicted worldviews are revised through the provider and the
/// decision worldview is re-selected (returns true: run the fast loop
/// again). Otherwise extracts E_Y and returns false.
bool slow_loop(LoopState& state, hypothesis::Provider& provider, data::Dataset& ds, const sim::Simulator& sim,
               const PipelineConfig& config);

/// The full run. `truth`, when given, adds an evaluation block to the
/// report. `checkpoint` receives a resumable state after every round;
/// `resume` restores one.
PipelineResult run_pipeline(const sim::Simulator& sim, hypothesis::Provider& provider, data::Dataset ds,
                            const std::string& query, const PipelineConfig& config,
                            const std::optional<GroundTruth>& truth = std::nullopt, const Checkpoint& checkpoint = {},
                            const std::optional<nlohmann::json>& resume = std::nullopt);

/// Evaluation block: factor categories, ancestor F1 and structure metrics
/// of `learned` against the truth (truth-only vertices are added isolated).
nlohmann::json evaluate(const MixedGraph& learned, const std::set<std::string>& boundary, const std::string& target,
                        const GroundTruth& truth);

nlohmann::json checkpoint_json(const LoopState& state);

}  // namespace causeway::pipeline
