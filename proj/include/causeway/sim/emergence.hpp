#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causeway/data/dataset.hpp"
#include "causeway/sim/simulator.hpp"

namespace causeway::sim {

/// Reference entropy of the best operating regime.
inline constexpr double kHBest = 1.1609;

/// Contract-deviation categories, in minutes (actual - promised):
/// 0 early (< -10), 1 on time [-10, 0], 2 late (0, 10], 3 late (10, 30],
/// 4 late (> 30).
inline constexpr int kDeviationCategories = 5;
int deviation_category(double deviation);

/// Shannon entropy (natural log) of the category histogram of `deviations`.
double deviation_entropy(std::span<const double> deviations);

/// max(0, 1 - exp(-(h - h_best) / h_best)). Throws ValidationError when
/// h_best <= 0.
double emergence_from_entropy(double h, double h_best = kHBest);

/// Emergence score of a run from its completed orders' deviations. Throws
/// ValidationError for an empty list.
double emergence_indicator(std::span<const double> deviations, double h_best = kHBest);

/// Run-level feature row of a log (its summary plus the outcome under
/// `y_column` unless a feature of that name exists). Empty when the run has
/// no outcome.
std::optional<std::map<std::string, double>> run_level_features(const RolloutLog& log,
                                                                const std::string& y_column = "y");

/// One row per log; runs without an outcome are dropped with a warning.
/// Throws ValidationError if the logs disagree on the feature schema.
data::Dataset logs_to_dataset(const std::vector<RolloutLog>& logs, const std::string& y_column = "y");

}  // namespace causeway::sim
