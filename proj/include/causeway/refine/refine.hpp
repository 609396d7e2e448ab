#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "causeway/data/dataset.hpp"
#include "causeway/data/factor.hpp"

namespace causeway::refine {

struct RefineOptions {
    /// Share of rows held out for evaluating the reference predictor.
    double holdout_frac = 0.25;
    /// Share of held-out rows forming the worst-explained group.
    double worst_fraction = 0.25;
    /// Admission margin tau_I.
    double tau = 0.0;
    /// Level of the CI test used for pruning.
    double alpha = 0.05;
    int bins = 5;
    /// L2 penalty of the reference predictors (standardized features).
    double penalty = 1.0;
    std::uint64_t seed = 0;
};

/// Deterministic train/holdout partition of rows [0, n).
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> holdout;
};

/// Throws ValidationError for n < 10 or frac outside (0, 1).
Split holdout_split(std::size_t n, double frac, std::uint64_t seed);

/// Per-row held-out loss of the reference predictor for `target` given
/// `cond`: squared error (ridge) for a continuous target, log-loss
/// (multinomial logistic) for an ordinal target. Entry i belongs to
/// split.holdout[i].
std::vector<double> holdout_losses(const data::Dataset& ds, const std::string& target,
                                   const std::vector<std::string>& cond, const Split& split, double penalty = 1.0);

/// Mean held-out loss H_b(Y | cond).
double predictive_uncertainty(const data::Dataset& ds, const std::string& target, const std::vector<std::string>& cond,
                              double holdout_frac = 0.25, std::uint64_t seed = 0);

/// The `fraction` of held-out rows with the largest loss under the predictor
/// on `cond` (ties by row index), as sorted dataset row indices.
std::vector<std::size_t> worst_group(const data::Dataset& ds, const std::string& target,
                                     const std::vector<std::string>& cond, double fraction,
                                     const RefineOptions& options = {});

/// Mean loss of the predictor on `cond` over the worst-explained group of
/// `cond` itself: the proxy residual difficulty F-hat.
double residual_difficulty(const data::Dataset& ds, const std::string& target, const std::vector<std::string>& cond,
                           const RefineOptions& options = {});

struct GainReport {
    std::string candidate;
    double gain = 0.0;
    bool admitted = false;
    double threshold = 0.0;
    double before = 0.0;
    double after = 0.0;
};

/// H_b(Y | V) - H_b(Y | V, Z), both on the worst-explained group under V.
GainReport information_gain(const data::Dataset& ds, const std::string& target, const std::vector<std::string>& active,
                            const std::string& candidate, const RefineOptions& options = {});

/// Removes every W with Y independent of W given the rest, sweeping in name
/// order and restarting until nothing changes.
std::vector<std::string> prune_redundant(const data::Dataset& ds, const std::string& target,
                                         const std::vector<std::string>& active, double alpha = 0.05, int bins = 5);

/// A refinement candidate: a logged column, or a factor to materialize.
struct Candidate {
    std::string name;
    std::optional<data::FactorSpec> spec;
};

struct RefinementState {
    int round = 0;
    /// V^(t), sorted.
    std::vector<std::string> active;
    /// B_t: the pruned active set, so boundary == active after every round.
    std::vector<std::string> boundary;
    std::vector<double> f_trajectory;
    std::vector<int> admitted_per_round;
    std::vector<std::vector<GainReport>> gains;
};

RefinementState initial_state(const data::Dataset& ds, const std::string& target, std::vector<std::string> active,
                              const RefineOptions& options = {});

/// Admits candidates with gain > tau (gains computed against the same
/// snapshot), prunes, and appends F-hat of the new active set. Factor
/// candidates are materialized into `ds` first.
RefinementState refine_round(const RefinementState& state, const std::vector<Candidate>& candidates,
                             data::Dataset& ds, const std::string& target, const RefineOptions& options = {});

/// Success at t iff F_{t+1} <= F_t - epsilon; p-hat is the success share
/// and C-hat the median relative decrease over successes (0 when none).
std::pair<double, double> estimate_pc(const std::vector<double>& f_trajectory, double epsilon);

/// One JSON object per executed round.
nlohmann::json round_record(const RefinementState& state);

}  // namespace causeway::refine
