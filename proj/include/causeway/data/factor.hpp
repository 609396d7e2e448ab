#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/data/dataset.hpp"

namespace causeway::data {

enum class FactorTemplate { ratio, difference, rolling_mean, rolling_var, count, share, graph_metric };
enum class Aggregate { mean, last, max, sum };

const char* to_string(FactorTemplate t);
std::optional<FactorTemplate> parse_template(std::string_view text);

/// Deterministic construction rule for a computable factor.
///
/// Template semantics (per row):
///   ratio        inputs[0] / inputs[1], denominator guarded
///   difference   inputs[0] - inputs[1]
///   rolling_mean mean of the last `window` values of inputs[0] in its sequence
///   rolling_var  population variance over the same window
///   count        number of inputs whose value exceeds params["threshold"] (default 0)
///   share        inputs[0] / inputs[1] for two inputs, otherwise inputs[0] / sum(inputs)
///   graph_metric degree summary over per-entity degree columns, chosen by
///                options["metric"]: mean_degree (default), max_degree,
///                degree_concentration (max / sum)
struct FactorSpec {
    std::string name;
    FactorTemplate kind = FactorTemplate::ratio;
    std::vector<std::string> inputs;
    int window = 1;
    std::map<std::string, double> params;
    std::map<std::string, std::string> options;
    /// Step-to-run reduction applied by aggregate_by_sequence.
    Aggregate aggregate = Aggregate::mean;

    friend bool operator==(const FactorSpec&, const FactorSpec&) = default;
};

/// |denominator| below this yields 0 and counts as a guarded row.
inline constexpr double kDenominatorGuard = 1e-12;

/// Throws ValidationError for empty inputs, window < 1, or a name that
/// collides with an input.
void validate(const FactorSpec& spec);

/// Appends the factor column (provenance constructed). Throws
/// ValidationError for unknown inputs or a name already present.
Dataset materialize_factor(const Dataset& ds, const FactorSpec& spec);

/// Reduces a per-step table to one row per sequence (first-appearance
/// order). Columns without an explicit rule use the mean.
Dataset aggregate_by_sequence(const Dataset& ds, const std::map<std::string, Aggregate>& rules = {});

using SupportSet = std::map<std::string, std::set<std::string>>;

/// The factor's own input columns.
std::set<std::string> support_of(const FactorSpec& spec);

/// Support map over every column of `ds` plus the given specs. Logged columns
/// map to themselves; factors built on other factors are expanded until only
/// logged columns remain.
SupportSet build_supports(const std::vector<std::string>& logged, const std::vector<FactorSpec>& specs);

nlohmann::json to_json(const FactorSpec& spec);
FactorSpec factor_from_json(const nlohmann::json& j, const std::string& path = "");

}  // namespace causeway::data
