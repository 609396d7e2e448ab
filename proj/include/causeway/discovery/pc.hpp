#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/ci/ci_test.hpp"
#include "causeway/data/dataset.hpp"
#include "causeway/graph/mixed_graph.hpp"

namespace causeway::discovery {

using graph::MixedGraph;
using graph::NamePair;

/// Ordered-pair constraints on structure. (a, b) in `required` means a -> b
/// must appear; (a, b) in `forbidden` means the arrow a -> b may not.
/// Confirmed edges come from counterfactual adjudication and are always also
/// required.
struct BackgroundKnowledge {
    std::set<NamePair> required;
    std::set<NamePair> forbidden;
    std::set<NamePair> confirmed;

    void require(const std::string& from, const std::string& to) { required.insert({from, to}); }
    void forbid(const std::string& from, const std::string& to) { forbidden.insert({from, to}); }
    /// Records a simulation-confirmed arrow and promotes it to required.
    void confirm(const std::string& from, const std::string& to);

    /// Human-readable conflicts (required vs forbidden, required both ways).
    std::vector<std::string> conflicts() const;

    friend bool operator==(const BackgroundKnowledge&, const BackgroundKnowledge&) = default;
};

nlohmann::json to_json(const BackgroundKnowledge& bk);
BackgroundKnowledge bk_from_json(const nlohmann::json& j);

/// Thrown when background knowledge cannot be honoured.
class ConstraintConflict : public std::runtime_error {
public:
    explicit ConstraintConflict(std::vector<std::string> conflicts);
    const std::vector<std::string>& conflicts() const { return conflicts_; }

private:
    std::vector<std::string> conflicts_;
};

struct PcOptions {
    double alpha = ci::kDefaultAlpha;
    /// Largest conditioning set tried during adjacency search.
    int max_cond = 3;
    /// Quantile bins used when a mixed variable set must be discretized.
    int bins = 5;
    std::shared_ptr<ci::AuditLog> audit;
};

struct PcResult {
    MixedGraph cpdag;
    /// Separating set for every pair removed by a CI test.
    std::map<NamePair, std::vector<std::string>> sepsets;
    std::size_t tests = 0;
    /// Orientations skipped because they would conflict or close a cycle.
    std::vector<std::string> notes;
};

/// PC-stable adjacency search (variables in lexicographic order, conditioning
/// sets of increasing size up to max_cond), v-structure orientation, then
/// background knowledge and Meek closure.
///
/// Pairs with both directions forbidden are removed before the search;
/// required edges are injected after it with their direction fixed; a single
/// forbidden direction fixes the opposite one. Throws ConstraintConflict when
/// the knowledge is contradictory or would force a directed cycle.
PcResult pc_learn_detailed(const data::Dataset& ds, const std::vector<std::string>& vars,
                           const BackgroundKnowledge& bk, const PcOptions& options = {});

MixedGraph pc_learn(const data::Dataset& ds, const std::vector<std::string>& vars, double alpha,
                    const BackgroundKnowledge& bk = {});

/// Closes a partially directed graph under Meek's four rules. Only
/// undirected (tail-tail) edges are ever oriented; an orientation that would
/// close a directed cycle is skipped and logged.
MixedGraph meek_orient(MixedGraph g, std::vector<std::string>* notes = nullptr);

/// Orients a fixed set of arrows on top of a CPDAG and re-runs Meek closure.
/// Arrows whose pair is not adjacent are added. Throws ConstraintConflict if
/// an arrow would close a cycle.
MixedGraph apply_orientations(MixedGraph g, const std::set<NamePair>& arrows);

struct AmbiguousEdge {
    NamePair pair;
    double uncertainty = 1.0;
    double stability = 0.0;
};

/// Every edge that is not fully directed, with u_e = 1.
std::vector<AmbiguousEdge> ambiguous_edges(const MixedGraph& g);

/// sigma_e = 1 - modal-outcome frequency across `k` PC runs on row
/// subsamples of size frac * n. Outcomes per pair are the two directions,
/// unoriented, and absent. Covers every pair adjacent in at least one run.
/// The k PC runs behind stability_resample.
std::vector<MixedGraph> resample_runs(const data::Dataset& ds, const std::vector<std::string>& vars,
                                      const BackgroundKnowledge& bk, int k, double frac, std::uint64_t seed,
                                      const PcOptions& options = {});
std::map<NamePair, double> stability_from_runs(const std::vector<MixedGraph>& runs);

std::map<NamePair, double> stability_resample(const data::Dataset& ds, const std::vector<std::string>& vars,
                                              const BackgroundKnowledge& bk, int k, double frac,
                                              std::uint64_t seed, const PcOptions& options = {});

/// Markov blanket of `target` read off a (CP)DAG: neighbours plus co-parents
/// of the target's oriented children.
std::set<std::string> markov_blanket(const MixedGraph& g, const std::string& target);

}  // namespace causeway::discovery
