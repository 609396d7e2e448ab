#include "causeway/data/factor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "causeway/common.hpp"

namespace causeway::data {

using nlohmann::json;

const char* to_string(FactorTemplate t) {
    switch (t) {
        case FactorTemplate::ratio: return "ratio";
        case FactorTemplate::difference: return "difference";
        case FactorTemplate::rolling_mean: return "rolling_mean";
        case FactorTemplate::rolling_var: return "rolling_var";
        case FactorTemplate::count: return "count";
        case FactorTemplate::share: return "share";
        case FactorTemplate::graph_metric: return "graph_metric";
    }
    return "?";
}

std::optional<FactorTemplate> parse_template(std::string_view text) {
    for (auto t : {FactorTemplate::ratio, FactorTemplate::difference, FactorTemplate::rolling_mean,
                   FactorTemplate::rolling_var, FactorTemplate::count, FactorTemplate::share,
                   FactorTemplate::graph_metric})
        if (text == to_string(t)) return t;
    return std::nullopt;
}

namespace {

const char* to_string(Aggregate a) {
    switch (a) {
        case Aggregate::mean: return "mean";
        case Aggregate::last: return "last";
        case Aggregate::max: return "max";
        case Aggregate::sum: return "sum";
    }
    return "mean";
}

std::optional<Aggregate> parse_aggregate(std::string_view text) {
    for (auto a : {Aggregate::mean, Aggregate::last, Aggregate::max, Aggregate::sum})
        if (text == to_string(a)) return a;
    return std::nullopt;
}

std::size_t arity_min(FactorTemplate t) {
    switch (t) {
        case FactorTemplate::ratio:
        case FactorTemplate::difference:
        case FactorTemplate::share: return 2;
        default: return 1;
    }
}

double guarded_divide(double num, double den, std::size_t& guarded) {
    if (std::abs(den) < kDenominatorGuard) {
        ++guarded;
        return 0.0;
    }
    return num / den;
}

// Rows grouped by sequence id, each group in row order. Without sequence
// ids the whole table is one sequence.
std::vector<std::vector<std::size_t>> sequences(const Dataset& ds) {
    std::vector<std::vector<std::size_t>> groups;
    if (!ds.has_sequences()) {
        groups.emplace_back(ds.rows());
        std::iota(groups.back().begin(), groups.back().end(), 0);
        return groups;
    }
    std::map<std::int64_t, std::size_t> slot;
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        const auto id = ds.sequence_ids()[r];
        auto [it, fresh] = slot.emplace(id, groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].push_back(r);
    }
    return groups;
}

}  // namespace

void validate(const FactorSpec& spec) {
    if (spec.name.empty()) throw ValidationError("factor spec: name must be nonempty");
    if (spec.inputs.empty()) throw ValidationError("factor '" + spec.name + "': inputs must be nonempty");
    if (spec.inputs.size() < arity_min(spec.kind))
        throw ValidationError("factor '" + spec.name + "': template " + to_string(spec.kind) + " needs at least " +
                              std::to_string(arity_min(spec.kind)) + " inputs");
    if (spec.window < 1) throw ValidationError("factor '" + spec.name + "': window must be >= 1");
    if (std::find(spec.inputs.begin(), spec.inputs.end(), spec.name) != spec.inputs.end())
        throw ValidationError("factor '" + spec.name + "': name collides with an input");
    if (spec.kind == FactorTemplate::graph_metric) {
        auto it = spec.options.find("metric");
        if (it != spec.options.end() && it->second != "mean_degree" && it->second != "max_degree" &&
            it->second != "degree_concentration")
            throw ValidationError("factor '" + spec.name + "': unknown graph metric '" + it->second + "'");
    }
}

Dataset materialize_factor(const Dataset& ds, const FactorSpec& spec) {
    validate(spec);
    if (ds.has(spec.name)) throw ValidationError("factor '" + spec.name + "' collides with an existing column");
    std::vector<std::span<const double>> in;
    for (const auto& name : spec.inputs) {
        if (!ds.has(name)) throw ValidationError("factor '" + spec.name + "': unknown input column '" + name + "'");
        in.push_back(ds.values(name));
    }
    const std::size_t n = ds.rows();
    std::vector<double> out(n, 0.0);
    std::size_t guarded = 0;
    switch (spec.kind) {
        case FactorTemplate::ratio:
            for (std::size_t r = 0; r < n; ++r) out[r] = guarded_divide(in[0][r], in[1][r], guarded);
            break;
        case FactorTemplate::difference:
            for (std::size_t r = 0; r < n; ++r) out[r] = in[0][r] - in[1][r];
            break;
        case FactorTemplate::share:
            for (std::size_t r = 0; r < n; ++r) {
                double whole = in[1][r];
                if (in.size() > 2) {
                    whole = 0.0;
                    for (const auto& col : in) whole += col[r];
                }
                out[r] = guarded_divide(in[0][r], whole, guarded);
            }
            break;
        case FactorTemplate::count: {
            const double threshold = spec.params.contains("threshold") ? spec.params.at("threshold") : 0.0;
            for (std::size_t r = 0; r < n; ++r)
                for (const auto& col : in) out[r] += col[r] > threshold ? 1.0 : 0.0;
            break;
        }
        case FactorTemplate::rolling_mean:
        case FactorTemplate::rolling_var: {
            const auto w = static_cast<std::size_t>(spec.window);
            for (const auto& rows : sequences(ds)) {
                for (std::size_t k = 0; k < rows.size(); ++k) {
                    const std::size_t begin = k + 1 >= w ? k + 1 - w : 0;
                    double mean = 0.0;
                    for (std::size_t j = begin; j <= k; ++j) mean += in[0][rows[j]];
                    const double count = static_cast<double>(k + 1 - begin);
                    mean /= count;
                    if (spec.kind == FactorTemplate::rolling_mean) {
                        out[rows[k]] = mean;
                    } else {
                        double var = 0.0;
                        for (std::size_t j = begin; j <= k; ++j) var += (in[0][rows[j]] - mean) * (in[0][rows[j]] - mean);
                        out[rows[k]] = var / count;
                    }
                }
            }
            break;
        }
        case FactorTemplate::graph_metric: {
            const auto it = spec.options.find("metric");
            const std::string metric = it == spec.options.end() ? "mean_degree" : it->second;
            for (std::size_t r = 0; r < n; ++r) {
                double sum = 0.0, peak = 0.0;
                for (const auto& col : in) {
                    sum += col[r];
                    peak = std::max(peak, col[r]);
                }
                if (metric == "max_degree")
                    out[r] = peak;
                else if (metric == "degree_concentration")
                    out[r] = guarded_divide(peak, sum, guarded);
                else
                    out[r] = sum / static_cast<double>(in.size());
            }
            break;
        }
    }
    Dataset result = ds.with_column(Column{spec.name, ValueKind::continuous, Provenance::constructed, std::move(out)});
    if (guarded > 0) result.note_guarded(spec.name, guarded);
    return result;
}

Dataset aggregate_by_sequence(const Dataset& ds, const std::map<std::string, Aggregate>& rules) {
    const auto groups = sequences(ds);
    Dataset out;
    std::vector<std::int64_t> ids;
    for (const auto& rows : groups) ids.push_back(ds.has_sequences() ? ds.sequence_ids()[rows.front()] : 0);
    for (const auto& col : ds.columns()) {
        const auto rule_it = rules.find(col.name);
        const Aggregate rule = rule_it == rules.end() ? Aggregate::mean : rule_it->second;
        Column reduced{col.name, col.kind, col.provenance, {}};
        for (const auto& rows : groups) {
            double value = 0.0;
            switch (rule) {
                case Aggregate::mean:
                case Aggregate::sum:
                    for (auto r : rows) value += col.values[r];
                    if (rule == Aggregate::mean && !rows.empty()) value /= static_cast<double>(rows.size());
                    break;
                case Aggregate::last: value = rows.empty() ? 0.0 : col.values[rows.back()]; break;
                case Aggregate::max:
                    value = rows.empty() ? 0.0 : col.values[rows.front()];
                    for (auto r : rows) value = std::max(value, col.values[r]);
                    break;
            }
            reduced.values.push_back(value);
        }
        if (reduced.kind == ValueKind::ordinal && rule == Aggregate::mean) reduced.kind = ValueKind::continuous;
        out.add_column(std::move(reduced));
    }
    out.set_sequence_ids(std::move(ids));
    return out;
}

std::set<std::string> support_of(const FactorSpec& spec) { return {spec.inputs.begin(), spec.inputs.end()}; }

SupportSet build_supports(const std::vector<std::string>& logged, const std::vector<FactorSpec>& specs) {
    SupportSet out;
    for (const auto& name : logged) out[name] = {name};
    std::map<std::string, const FactorSpec*> by_name;
    for (const auto& s : specs) by_name[s.name] = &s;
    // Expand recursively; depth bounded by the number of specs (cycles rejected).
    std::function<std::set<std::string>(const std::string&, std::size_t)> expand =
        [&](const std::string& name, std::size_t depth) -> std::set<std::string> {
        if (auto it = out.find(name); it != out.end()) return it->second;
        auto spec = by_name.find(name);
        if (spec == by_name.end()) throw ValidationError("no support for '" + name + "': not logged and no factor spec");
        if (depth > specs.size()) throw ValidationError("factor '" + name + "' has cyclic inputs");
        std::set<std::string> acc;
        for (const auto& input : spec->second->inputs) {
            auto sub = expand(input, depth + 1);
            acc.insert(sub.begin(), sub.end());
        }
        out[name] = acc;
        return acc;
    };
    for (const auto& s : specs) expand(s.name, 0);
    return out;
}

json to_json(const FactorSpec& spec) {
    json params = json::object();
    for (const auto& [k, v] : spec.params) params[k] = v;
    for (const auto& [k, v] : spec.options) params[k] = v;
    if (spec.aggregate != Aggregate::mean) params["aggregate"] = to_string(spec.aggregate);
    return {{"name", spec.name}, {"template", to_string(spec.kind)}, {"inputs", spec.inputs},
            {"window", spec.window}, {"params", params}};
}

FactorSpec factor_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path + ": expected object");
    FactorSpec spec;
    auto get_string = [&](const char* key) -> std::string {
        if (!j.contains(key)) throw ValidationError(path + "/" + key + ": missing required field");
        if (!j[key].is_string()) throw ValidationError(path + "/" + key + ": expected string");
        return j[key].get<std::string>();
    };
    spec.name = get_string("name");
    const auto tmpl = get_string("template");
    auto kind = parse_template(tmpl);
    if (!kind) throw ValidationError(path + "/template: unknown template '" + tmpl + "'");
    spec.kind = *kind;
    if (!j.contains("inputs") || !j["inputs"].is_array()) throw ValidationError(path + "/inputs: expected array");
    for (std::size_t i = 0; i < j["inputs"].size(); ++i) {
        if (!j["inputs"][i].is_string())
            throw ValidationError(path + "/inputs/" + std::to_string(i) + ": expected string");
        spec.inputs.push_back(j["inputs"][i].get<std::string>());
    }
    if (j.contains("window")) {
        if (!j["window"].is_number_integer()) throw ValidationError(path + "/window: expected integer");
        spec.window = j["window"].get<int>();
    }
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw ValidationError(path + "/params: expected object");
        for (const auto& [k, v] : j["params"].items()) {
            if (k == "aggregate") {
                if (!v.is_string()) throw ValidationError(path + "/params/aggregate: expected string");
                auto agg = parse_aggregate(v.get<std::string>());
                if (!agg) throw ValidationError(path + "/params/aggregate: unknown rule '" + v.get<std::string>() + "'");
                spec.aggregate = *agg;
            } else if (v.is_number()) {
                spec.params[k] = v.get<double>();
            } else if (v.is_string()) {
                spec.options[k] = v.get<std::string>();
            } else {
                throw ValidationError(path + "/params/" + k + ": expected number or string");
            }
        }
    }
    try {
        validate(spec);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return spec;
}

}  // namespace causeway::data
