#include "causeway/sim/scm.hpp"

#include <algorithm>
#include <cmath>

#include "causeway/common.hpp"
#include "causeway/graph/algorithms.hpp"
#include "causeway/random.hpp"

namespace causeway::sim {

namespace {

const char* to_string(Equation e) {
    switch (e) {
        case Equation::linear: return "linear";
        case Equation::logistic: return "logistic";
        case Equation::threshold: return "threshold";
    }
    return "linear";
}

Equation parse_equation(const std::string& text, const std::string& path) {
    if (text == "linear") return Equation::linear;
    if (text == "logistic") return Equation::logistic;
    if (text == "threshold") return Equation::threshold;
    throw ValidationError(path + "/equation: unknown equation '" + text + "'");
}

std::string join(const std::set<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

}  // namespace

std::set<std::string> dag_markov_blanket(const graph::MixedGraph& dag, const std::string& target) {
    std::set<std::string> out;
    for (const auto& p : dag.parents(target)) out.insert(p);
    for (const auto& c : dag.children(target)) {
        out.insert(c);
        for (const auto& co : dag.parents(c))
            if (co != target) out.insert(co);
    }
    return out;
}

ScmModel::ScmModel(std::string name, std::vector<ScmNode> nodes, std::string target,
                   std::optional<std::set<std::string>> boundary, std::optional<std::set<std::string>> ancestors)
    : name_(std::move(name)), target_(std::move(target)) {
    for (const auto& n : nodes) dag_.add_vertex(n.name);
    for (const auto& n : nodes) {
        if (!(n.noise >= 0.0)) throw ValidationError("scm node '" + n.name + "': noise must be >= 0");
        for (const auto& [p, _] : n.parents) {
            if (!dag_.has_vertex(p)) throw ValidationError("scm node '" + n.name + "': unknown parent '" + p + "'");
            dag_.add_directed(p, n.name);
        }
    }
    if (!graph::is_acyclic(dag_)) throw ValidationError("scm '" + name_ + "': structural equations are cyclic");
    if (!dag_.has_vertex(target_)) throw ValidationError("scm '" + name_ + "': unknown target '" + target_ + "'");

    // Kahn's algorithm with name order among ready vertices.
    std::map<std::string, ScmNode> by_name;
    std::map<std::string, int> indegree;
    for (auto& n : nodes) {
        indegree[n.name] = static_cast<int>(n.parents.size());
        by_name.emplace(n.name, std::move(n));
    }
    std::set<std::string> ready;
    for (const auto& [v, d] : indegree)
        if (d == 0) ready.insert(v);
    while (!ready.empty()) {
        const std::string v = *ready.begin();
        ready.erase(ready.begin());
        index_[v] = nodes_.size();
        nodes_.push_back(by_name.at(v));
        for (const auto& c : dag_.children(v))
            if (--indegree[c] == 0) ready.insert(c);
    }

    const auto true_boundary = dag_markov_blanket(dag_, target_);
    auto true_ancestors = graph::reach_backward(dag_, {target_});
    true_ancestors.erase(target_);
    if (boundary && *boundary != true_boundary)
        throw ValidationError("scm '" + name_ + "': declared Markov boundary {" + join(*boundary) +
                              "} does not match the graph {" + join(true_boundary) + "}");
    if (ancestors && *ancestors != true_ancestors)
        throw ValidationError("scm '" + name_ + "': declared ancestors {" + join(*ancestors) +
                              "} do not match the graph {" + join(true_ancestors) + "}");
    boundary_ = true_boundary;
    ancestors_ = true_ancestors;
}

const ScmNode& ScmModel::node(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("scm: unknown variable '" + name + "'");
    return nodes_[it->second];
}

std::vector<std::string> ScmModel::names() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) out.push_back(n.name);
    return out;
}

ScmModel ScmModel::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError(": expected object");
    if (!j.contains("nodes") || !j["nodes"].is_array()) throw ValidationError("/nodes: expected array");
    if (!j.contains("target") || !j["target"].is_string()) throw ValidationError("/target: expected string");
    std::vector<ScmNode> nodes;
    for (std::size_t i = 0; i < j["nodes"].size(); ++i) {
        const auto& jn = j["nodes"][i];
        const std::string path = "/nodes/" + std::to_string(i);
        if (!jn.is_object() || !jn.contains("name") || !jn["name"].is_string())
            throw ValidationError(path + "/name: expected string");
        ScmNode n;
        n.name = jn["name"].get<std::string>();
        try {
            n.equation = parse_equation(jn.value("equation", "linear"), path);
            n.intercept = jn.value("intercept", 0.0);
            n.noise = jn.value("noise", 1.0);
            n.threshold = jn.value("threshold", 0.0);
            if (jn.contains("parents")) n.parents = jn["parents"].get<std::map<std::string, double>>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path + ": " + e.what());
        }
        nodes.push_back(std::move(n));
    }
    std::optional<std::set<std::string>> boundary, ancestors;
    if (j.contains("markov_boundary")) boundary = j["markov_boundary"].get<std::set<std::string>>();
    if (j.contains("ancestors")) ancestors = j["ancestors"].get<std::set<std::string>>();
    return ScmModel(j.value("name", "scm"), std::move(nodes), j["target"].get<std::string>(), boundary, ancestors);
}

nlohmann::json ScmModel::to_json() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_) {
        nlohmann::json jn = {{"name", n.name},
                             {"equation", to_string(n.equation)},
                             {"intercept", n.intercept},
                             {"noise", n.noise},
                             {"parents", n.parents}};
        if (n.equation == Equation::threshold) jn["threshold"] = n.threshold;
        nodes.push_back(std::move(jn));
    }
    return {{"name", name_},
            {"target", target_},
            {"nodes", nodes},
            {"markov_boundary", boundary_},
            {"ancestors", ancestors_}};
}

void ScmModel::apply_knob(ScmParams& params, const std::string& knob, double value) const {
    if (!std::isfinite(value)) throw InfeasibleKnob("knob '" + knob + "': non-finite value");
    if (knob == "noise_scale") {
        if (value < 0.0) throw InfeasibleKnob("knob 'noise_scale' must be >= 0");
        params.noise_scale = value;
        return;
    }
    const auto colon = knob.find(':');
    if (colon == std::string::npos) throw InfeasibleKnob("unknown knob '" + knob + "'");
    const std::string kind = knob.substr(0, colon);
    const std::string arg = knob.substr(colon + 1);
    if (kind == "coef") {
        const auto arrow = arg.find("->");
        if (arrow == std::string::npos) throw InfeasibleKnob("knob '" + knob + "': expected coef:<parent>-><child>");
        const std::string parent = arg.substr(0, arrow), child = arg.substr(arrow + 2);
        if (!index_.contains(child) || !node(child).parents.contains(parent))
            throw InfeasibleKnob("knob '" + knob + "': no such mechanism");
        params.coef[{parent, child}] = value;
        return;
    }
    if (!index_.contains(arg)) throw InfeasibleKnob("knob '" + knob + "': unknown variable '" + arg + "'");
    if (kind == "do") {
        params.clamps[arg] = value;
    } else if (kind == "shift") {
        params.shifts[arg] = value;
    } else if (kind == "noise") {
        if (value < 0.0) throw InfeasibleKnob("knob '" + knob + "' must be >= 0");
        params.noise[arg] = value;
    } else {
        throw InfeasibleKnob("unknown knob '" + knob + "'");
    }
}

bool ScmModel::knob_valid(const std::string& knob) const {
    ScmParams scratch;
    try {
        apply_knob(scratch, knob, 0.0);
        return true;
    } catch (const InfeasibleKnob&) {
        return false;
    }
}

std::vector<std::string> ScmModel::knobs() const {
    std::vector<std::string> out{"noise_scale"};
    for (const auto& n : nodes_) {
        out.push_back("do:" + n.name);
        out.push_back("shift:" + n.name);
        out.push_back("noise:" + n.name);
        for (const auto& [p, _] : n.parents) out.push_back("coef:" + p + "->" + n.name);
    }
    return out;
}

std::map<std::string, double> scm_unit(const ScmModel& model, std::uint64_t seed, std::uint64_t row,
                                       const ScmParams& params) {
    std::map<std::string, double> values;
    for (const auto& n : model.nodes()) {
        if (auto c = params.clamps.find(n.name); c != params.clamps.end()) {
            values[n.name] = c->second;
            continue;
        }
        double eta = n.intercept;
        if (auto s = params.shifts.find(n.name); s != params.shifts.end()) eta += s->second;
        for (const auto& [p, coef] : n.parents) {
            auto o = params.coef.find({p, n.name});
            eta += (o == params.coef.end() ? coef : o->second) * values.at(p);
        }
        double scale = n.noise;
        if (auto o = params.noise.find(n.name); o != params.noise.end()) scale = o->second;
        scale *= params.noise_scale;
        Stream rng(derive_seed(seed, fnv1a(n.name), row));
        switch (n.equation) {
            case Equation::linear: values[n.name] = eta + scale * rng.normal(); break;
            case Equation::logistic: values[n.name] = eta + scale * rng.logistic() > 0.0 ? 1.0 : 0.0; break;
            case Equation::threshold:
                values[n.name] = eta + scale * rng.normal() > n.threshold ? 1.0 : 0.0;
                break;
        }
    }
    return values;
}

data::Dataset scm_sample(const ScmModel& model, std::size_t n, std::uint64_t seed, const ScmParams& params) {
    std::vector<data::Column> cols;
    for (const auto& node : model.nodes()) {
        data::Column c;
        c.name = node.name;
        c.kind = node.equation == Equation::linear ? data::ValueKind::continuous : data::ValueKind::ordinal;
        c.values.resize(n);
        cols.push_back(std::move(c));
    }
    for (std::size_t r = 0; r < n; ++r) {
        const auto unit = scm_unit(model, seed, r, params);
        for (auto& c : cols) c.values[r] = unit.at(c.name);
    }
    // Columns in name order so datasets from equivalent models line up.
    std::sort(cols.begin(), cols.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    data::Dataset ds;
    for (auto& c : cols) ds.add_column(std::move(c));
    return ds;
}

ScmModel random_linear_scm(int p, double edge_prob, std::uint64_t seed, double lo, double hi, bool signed_weights) {
    if (p < 1) throw ValidationError("random_linear_scm: p must be >= 1");
    Stream rng(derive_seed(seed, fnv1a("random_linear_scm")));
    std::vector<ScmNode> nodes(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        nodes[j].name = "V" + std::to_string(j);
        for (int i = 0; i < j; ++i)
            if (rng.bernoulli(edge_prob)) {
                const double mag = rng.uniform(lo, hi);
                nodes[j].parents["V" + std::to_string(i)] = signed_weights && rng.bernoulli(0.5) ? -mag : mag;
            }
    }
    return ScmModel("random" + std::to_string(seed), std::move(nodes), "V" + std::to_string(p - 1));
}

ScmSimulator::ScmSimulator(ScmModel model, int units_per_rollout, ScmParams base)
    : model_(std::move(model)), units_(units_per_rollout), base_(std::move(base)), params_(base_) {
    if (units_ < 1) throw ValidationError("scm simulator: units per rollout must be >= 1");
}

void ScmSimulator::init(std::uint64_t seed) {
    seed_ = seed;
    params_ = base_;
    rows_.clear();
    applied_.clear();
}

void ScmSimulator::step() { rows_.push_back(scm_unit(model_, seed_, rows_.size(), params_)); }

void ScmSimulator::clamp(const std::string& knob, double value) {
    model_.apply_knob(params_, knob, value);
    applied_.emplace_back(knob, value);
}

nlohmann::json ScmSimulator::snapshot() const {
    nlohmann::json applied = nlohmann::json::array();
    for (const auto& [k, v] : applied_) applied.push_back({k, v});
    return {{"seed", seed_}, {"applied", applied}, {"rows", rows_}};
}

void ScmSimulator::restore(const nlohmann::json& state) {
    init(state.at("seed").get<std::uint64_t>());
    for (const auto& a : state.at("applied")) clamp(a[0].get<std::string>(), a[1].get<double>());
    rows_ = state.at("rows").get<std::vector<std::map<std::string, double>>>();
}

RolloutLog ScmSimulator::log() const {
    RolloutLog log;
    log.world = world();
    log.seed = seed_;
    nlohmann::json config = {{"model", model_.to_json()}, {"applied", snapshot()["applied"]}};
    log.config_hash = hex64(fnv1a(config.dump()));
    for (std::size_t r = 0; r < rows_.size(); ++r) log.events.push_back({{"step", r}, {"type", "unit"}, {"values", rows_[r]}});
    if (rows_.empty()) {
        log.flags.push_back("degenerate: no units");
        return log;
    }
    for (const auto& name : model_.names()) {
        double sum = 0.0;
        for (const auto& row : rows_) sum += row.at(name);
        log.summary[name] = sum / static_cast<double>(rows_.size());
    }
    log.y = log.summary.at(model_.target());
    return log;
}

}  // namespace causeway::sim
