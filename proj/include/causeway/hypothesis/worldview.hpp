#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/data/dataset.hpp"
#include "causeway/data/factor.hpp"
#include "causeway/graph/mixed_graph.hpp"
#include "causeway/intervene/intervene.hpp"

namespace causeway::hypothesis {

using graph::MixedGraph;
using graph::NamePair;

enum class VariableStatus { observable, constructible, uncertain };
const char* to_string(VariableStatus s);
std::optional<VariableStatus> parse_status(std::string_view text);

struct Variable {
    std::string name;
    std::string description;
    graph::Scale scale = graph::Scale::unknown;
    VariableStatus status = VariableStatus::observable;
    std::optional<data::FactorSpec> factor;
    friend bool operator==(const Variable&, const Variable&) = default;
};

struct Explanation {
    std::string text;
    std::string prerequisites;
    std::string evidence;
    double support = 0.5;
    friend bool operator==(const Explanation&, const Explanation&) = default;
};

struct Link {
    std::string source;
    std::string target;
    std::vector<Explanation> explanations;
    friend bool operator==(const Link&, const Link&) = default;
};

/// A mechanistic hypothesis: variables, causal links with competing
/// explanations, and the mechanism graph used to trace explanations.
struct Worldview {
    std::string id;
    std::string target;
    std::vector<Variable> variables;
    std::vector<Link> links;
    MixedGraph mechanism;
    /// Upstream roots for explanation paths; empty means "every vertex
    /// without parents".
    std::set<std::string> roots;
    /// Arrows the worldview rules out.
    std::set<NamePair> forbidden;
    std::vector<std::string> history;

    const Variable* variable(const std::string& name) const;
    Link* link(const std::string& source, const std::string& target);
    const Link* link(const std::string& source, const std::string& target) const;
    /// Declared roots, or the parentless vertices of the mechanism graph.
    std::set<std::string> effective_roots() const;
    friend bool operator==(const Worldview&, const Worldview&) = default;
};

/// Mechanism graph of the links (source -> target), vertices typed from the
/// variables. Throws ValidationError when a pair is linked both ways.
MixedGraph mechanism_from_links(const std::vector<Variable>& variables, const std::vector<Link>& links);

/// Throws ValidationError on a broken invariant: unknown link endpoints,
/// links without explanations, support outside [0, 1], a constructible
/// variable without a factor spec, or a directed cycle.
void validate(const Worldview& w);

/// Reads
///   {"id", "target", "unified_indicators": [{"name", "description", "scale",
///    "status", "factor"}], "competition_relationship": [{"source", "target",
///    "explanations": [{"text", "prerequisites", "evidence",
///    "support_estimation"}]}], "mechanism_graph"?, "roots"?, "forbidden"?}.
/// Errors carry a JSON pointer to the offending field.
Worldview worldview_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Worldview& w);

/// Stage I and II of worldview selection.
class Judge {
public:
    virtual ~Judge() = default;
    /// Rubric score on a 1-10 scale.
    virtual double rubric(const Worldview& w) const = 0;
    /// +1 when a wins, -1 when b wins, 0 for a tie.
    virtual int compare(const Worldview& a, const Worldview& b) const = 0;
    /// One multi-way adjudication over a tied set: an order over the ids, or
    /// empty when the judge cannot separate them.
    virtual std::vector<std::string> rank_all(const std::vector<const Worldview*>& tied) const = 0;
};

/// Rubric = 1 + 9 * mean link support, where a link's support is its best
/// explanation's. Pairwise and multi-way decisions follow the rubric.
class RuleJudge : public Judge {
public:
    double rubric(const Worldview& w) const override;
    int compare(const Worldview& a, const Worldview& b) const override;
    std::vector<std::string> rank_all(const std::vector<const Worldview*>& tied) const override;
};

inline constexpr int kDefaultShortlist = 3;

struct Selection {
    std::string chosen;
    std::vector<std::pair<std::string, double>> rubric;
    std::vector<std::string> shortlist;
    std::map<std::string, int> wins;
    bool cycle = false;
    std::vector<std::string> notes;
};

/// Rubric shortlist of size m, round-robin on the shortlist, most wins
/// chosen. Ties on the top win count get one multi-way adjudication, then id
/// order. Throws ValidationError for an empty candidate list.
Selection select_worldview_detailed(const std::vector<Worldview>& candidates, const Judge& judge,
                                    int shortlist = kDefaultShortlist);
Worldview select_worldview(const std::vector<Worldview>& candidates, const Judge& judge,
                           int shortlist = kDefaultShortlist);

struct NodeStatus {
    std::string name;
    VariableStatus status = VariableStatus::uncertain;
    std::string reason;
};

struct NodeReport {
    std::vector<NodeStatus> nodes;
    std::vector<std::string> uncertain;
};

/// Classifies each variable against the dataset: a logged column is
/// observable, a factor spec that materializes over the dataset (possibly via
/// other constructible variables) is constructible, anything else uncertain
/// with a reason.
NodeReport validate_worldview(const Worldview& w, const data::Dataset& ds);

/// Support multiplier applied to contradicted explanations.
inline constexpr double kDemotion = 0.5;

/// True when the adjudication contradicts the worldview: a confirmed
/// orientation opposite to a mechanism arrow, or a confirmed arrow the
/// worldview forbids. Refuted mechanism edges also count.
bool contradicts(const Worldview& w, const intervene::EdgeAdjudication& evidence);

/// Revises the worldview against one adjudicated edge. A confirmed arrow
/// against the mechanism flips it (or removes it when the flip would close a
/// cycle) and halves the contradicted explanations' support. A refuted
/// mechanism edge is removed, its explanations halved, and the other links
/// into the same target are scaled up to keep that target's total support
/// (capped at 1). Consistent evidence returns the worldview unchanged.
Worldview apply_contradiction(const Worldview& w, const intervene::EdgeAdjudication& evidence);

}  // namespace causeway::hypothesis
