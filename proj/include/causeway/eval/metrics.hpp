#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/graph/mixed_graph.hpp"

namespace causeway::eval {

using graph::MixedGraph;
using NameSet = std::set<std::string>;

/// Ratio that reads 0 when the denominator is 0.
double safe_ratio(double num, double den);
double f1_score(double precision, double recall);

struct FactorEvalReport {
    int mb = 0;
    int an = 0;
    int ot = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// Set when precision or recall had an empty denominator.
    std::vector<std::string> flags;
};

/// MB = |S n B|, AN = |S n (An \ B)|, OT = |S \ (An u B)|. Boundary members
/// that are not ancestors (spouses) count as on target.
FactorEvalReport categorize_factors(const NameSet& found, const NameSet& boundary, const NameSet& ancestors);

struct AncestorReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t predicted = 0;
    std::size_t truth = 0;
    std::size_t common = 0;
};

/// Precision/recall over pairs (u, Y) in each graph's transitive closure
/// (directed edges only). Two empty relation sets score 1. Throws
/// ValidationError when Y is missing from either graph.
AncestorReport ancestor_f1(const MixedGraph& predicted, const MixedGraph& truth, const std::string& target);

struct StructureReport {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0, fpr = 0.0;
    long added = 0, missed = 0, reversed = 0, unoriented = 0, shd = 0;
};

/// Counts over ordered directed edges; only tail-arrow edges are directed.
/// Throws ValidationError when the vertex sets differ.
StructureReport edge_metrics(const MixedGraph& predicted, const MixedGraph& truth);

struct ShdParts {
    long added = 0, missed = 0, reversed = 0, unoriented = 0, shd = 0;
};

/// Added and missed adjacencies, reversed directions, and common adjacencies
/// whose marks differ from the truth without being a clean reversal.
ShdParts shd_decompose(const MixedGraph& predicted, const MixedGraph& truth);

/// edge_metrics plus the SHD decomposition.
StructureReport structure_report(const MixedGraph& predicted, const MixedGraph& truth);

inline constexpr double kDefaultRestart = 0.15;

/// Random walk with restart at Y on the reversed graph: from v the walker
/// moves to a uniformly chosen parent of v (undirected and circle edges count
/// both ways), restarts at Y with probability alpha, and jumps to Y from
/// vertices without parents. Vertices outside Y's connected component score
/// 0. Power iteration until the L1 change is below 1e-10.
std::map<std::string, double> rwr_scores(const MixedGraph& g, const std::string& target,
                                         double alpha = kDefaultRestart);

struct ScriptRef {
    std::string id;
    std::string node;
};

struct RankedScript {
    std::string id;
    std::string node;
    double score = 0.0;
    bool mapped = false;
};

/// Scripts by descending pi(v(s)); scripts whose node is absent from g score
/// 0 and rank after mapped scripts of equal score; ties by id.
std::vector<RankedScript> rank_scripts(const std::vector<ScriptRef>& scripts, const std::map<std::string, double>& pi,
                                       const MixedGraph& g);

struct RankingReport {
    std::vector<RankedScript> ranking;
    int k = 5;
    double precision_at_k = 0.0;
    double map_at_k = 0.0;
    double mrr = 0.0;
    std::vector<std::string> flags;
};

/// P@K, MAP@K (normalized by min(K, |S+|)) and MRR for a ranked id list.
/// Throws ValidationError when k < 1 or a ranked id has no label.
RankingReport rank_metrics(const std::vector<std::string>& ranking, const std::map<std::string, bool>& labels,
                           int k = 5);

nlohmann::json to_json(const FactorEvalReport& r);
nlohmann::json to_json(const AncestorReport& r);
nlohmann::json to_json(const StructureReport& r);
nlohmann::json to_json(const RankingReport& r);

}  // namespace causeway::eval
