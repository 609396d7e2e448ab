#include "causeway/sim/emergence.hpp"

#include <array>
#include <cmath>

#include "causeway/common.hpp"

namespace causeway::sim {

int deviation_category(double d) {
    if (d < -10.0) return 0;
    if (d <= 0.0) return 1;
    if (d <= 10.0) return 2;
    if (d <= 30.0) return 3;
    return 4;
}

double deviation_entropy(std::span<const double> deviations) {
    std::array<double, kDeviationCategories> counts{};
    for (double d : deviations) counts[deviation_category(d)] += 1.0;
    const auto n = static_cast<double>(deviations.size());
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= c / n * std::log(c / n);
    return h;
}

double emergence_from_entropy(double h, double h_best) {
    if (!(h_best > 0.0)) throw ValidationError("h_best must be positive");
    return std::max(0.0, 1.0 - std::exp(-(h - h_best) / h_best));
}

double emergence_indicator(std::span<const double> deviations, double h_best) {
    if (deviations.empty()) throw ValidationError("emergence indicator needs at least one deviation");
    return emergence_from_entropy(deviation_entropy(deviations), h_best);
}

std::optional<std::map<std::string, double>> run_level_features(const RolloutLog& log, const std::string& y_column) {
    if (!log.y) return std::nullopt;
    auto row = log.summary;
    if (!row.contains(y_column)) row[y_column] = *log.y;
    return row;
}

data::Dataset logs_to_dataset(const std::vector<RolloutLog>& logs, const std::string& y_column) {
    std::vector<std::map<std::string, double>> rows;
    std::size_t dropped = 0;
    for (const auto& log : logs) {
        auto row = run_level_features(log, y_column);
        if (!row) {
            ++dropped;
            continue;
        }
        if (!rows.empty()) {
            bool same = row->size() == rows.front().size();
            for (auto a = row->begin(), b = rows.front().begin(); same && a != row->end(); ++a, ++b)
                same = a->first == b->first;
            if (!same) throw ValidationError("rollout logs disagree on the feature schema");
        }
        rows.push_back(std::move(*row));
    }
    if (dropped > 0) log::warn(std::to_string(dropped) + " run(s) without an outcome dropped");
    data::Dataset ds;
    if (rows.empty()) return ds;
    for (const auto& [name, _] : rows.front()) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& r : rows) values.push_back(r.at(name));
        ds.add_column({name, data::ValueKind::continuous, data::Provenance::logged, std::move(values)});
    }
    return ds;
}

}  // namespace causeway::sim
