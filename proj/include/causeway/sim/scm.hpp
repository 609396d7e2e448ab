#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/data/dataset.hpp"
#include "causeway/graph/mixed_graph.hpp"
#include "causeway/sim/simulator.hpp"

namespace causeway::sim {

/// linear:    v = eta + s * N(0, 1)
/// logistic:  v = 1[eta + s * Logistic(0, 1) > 0]
/// threshold: v = 1[eta + s * N(0, 1) > threshold]
/// with eta = intercept + shift + sum(coef * parent) and s the noise scale.
enum class Equation { linear, logistic, threshold };

struct ScmNode {
    std::string name;
    Equation equation = Equation::linear;
    double intercept = 0.0;
    std::map<std::string, double> parents;
    double noise = 1.0;
    double threshold = 0.0;
};

/// Parameter overrides on top of the model (the knob surface).
///   do:<v>         hard clamp
///   shift:<v>      added to the intercept
///   coef:<p>-><c>  replaces a coefficient
///   noise:<v>      replaces a noise scale
///   noise_scale    multiplies every noise scale
struct ScmParams {
    std::map<std::string, double> clamps;
    std::map<std::string, double> shifts;
    std::map<std::string, double> noise;
    std::map<graph::NamePair, double> coef;
    double noise_scale = 1.0;
};

class ScmModel {
public:
    ScmModel() = default;
    /// Validates acyclicity and parents, then checks the declared Markov
    /// boundary and ancestors (when given) against the graph.
    ScmModel(std::string name, std::vector<ScmNode> nodes, std::string target,
             std::optional<std::set<std::string>> boundary = std::nullopt,
             std::optional<std::set<std::string>> ancestors = std::nullopt);

    static ScmModel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    const std::string& name() const { return name_; }
    const std::string& target() const { return target_; }
    const graph::MixedGraph& dag() const { return dag_; }
    /// Nodes in topological order (ties by name).
    const std::vector<ScmNode>& nodes() const { return nodes_; }
    const ScmNode& node(const std::string& name) const;
    const std::set<std::string>& markov_boundary() const { return boundary_; }
    const std::set<std::string>& ancestors() const { return ancestors_; }
    std::vector<std::string> names() const;

    /// Applies one knob to a parameter set. Throws InfeasibleKnob when the
    /// knob does not resolve against this model.
    void apply_knob(ScmParams& params, const std::string& knob, double value) const;
    bool knob_valid(const std::string& knob) const;
    std::vector<std::string> knobs() const;

private:
    std::string name_;
    std::vector<ScmNode> nodes_;
    std::map<std::string, std::size_t> index_;
    std::string target_;
    graph::MixedGraph dag_;
    std::set<std::string> boundary_;
    std::set<std::string> ancestors_;
};

/// Markov blanket of `target` in a DAG: parents, children, co-parents.
std::set<std::string> dag_markov_blanket(const graph::MixedGraph& dag, const std::string& target);

/// One unit of the model. Noise for (seed, vertex, row) comes from its own
/// stream, so a clamp never perturbs variables outside its descendants.
std::map<std::string, double> scm_unit(const ScmModel& model, std::uint64_t seed, std::uint64_t row,
                                       const ScmParams& params = {});

/// n units in topological-order sampling. Linear nodes are continuous
/// columns; logistic and threshold nodes are 0/1 ordinal codes.
data::Dataset scm_sample(const ScmModel& model, std::size_t n, std::uint64_t seed, const ScmParams& params = {});

/// Random linear-Gaussian model over `p` variables named V0..V{p-1}, edges
/// i -> j (i < j) with probability `edge_prob` and coefficients of magnitude
/// in [lo, hi] (random sign when `signed_weights`). The target is the last
/// variable.
ScmModel random_linear_scm(int p, double edge_prob, std::uint64_t seed, double lo = 0.5, double hi = 1.0,
                           bool signed_weights = true);

/// The model as a simulator: each step draws one unit; the summary holds the
/// mean of every variable over the steps and y is the target's mean.
class ScmSimulator : public Simulator {
public:
    explicit ScmSimulator(ScmModel model, int units_per_rollout = 1, ScmParams base = {});

    std::string world() const override { return "scm:" + model_.name(); }
    void init(std::uint64_t seed) override;
    void step() override;
    int default_steps() const override { return units_; }
    std::vector<std::string> knobs() const override { return model_.knobs(); }
    bool knob_valid(const std::string& knob) const override { return model_.knob_valid(knob); }
    void clamp(const std::string& knob, double value) override;
    nlohmann::json snapshot() const override;
    void restore(const nlohmann::json& state) override;
    RolloutLog log() const override;
    std::unique_ptr<Simulator> clone() const override { return std::make_unique<ScmSimulator>(*this); }

    const ScmModel& model() const { return model_; }

private:
    ScmModel model_;
    int units_;
    ScmParams base_;
    ScmParams params_;
    std::uint64_t seed_ = 0;
    std::vector<std::map<std::string, double>> rows_;
    std::vector<std::pair<std::string, double>> applied_;
};

}  // namespace causeway::sim
