#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/data/dataset.hpp"
#include "causeway/pipeline/pipeline.hpp"
#include "causeway/sim/scm.hpp"
#include "causeway/sim/simulator.hpp"

namespace causeway::pipeline {

/// A knob drawn uniformly from [lo, hi] for every observational rollout.
struct SweepRange {
    std::string knob;
    double lo = 0.0;
    double hi = 0.0;
    bool integer = false;
};

/// Rollout i uses seed derive_seed(seed, "observational", i) and settings
/// drawn from its own "design" stream, so runs can be added without
/// disturbing earlier ones.
std::vector<sim::RolloutLog> observational_logs(const sim::Simulator& sim, std::size_t runs, std::uint64_t seed,
                                                const std::vector<SweepRange>& sweep = {}, int steps = 0);

/// A parsed world description:
///   {"world": "scm", "model": <path or object>, "n": 10000,
///    "units_per_rollout": 1, "runs": 100}
///   {"world": "o2o", "o2o": {...config...}, "runs": 300,
///    "sweep": [{"knob", "lo", "hi", "integer"?}], "steps": 0}
/// Relative model paths resolve against `base`. Errors carry pointers.
struct WorldSpec {
    std::string kind;
    std::shared_ptr<sim::Simulator> sim;
    std::optional<sim::ScmModel> model;
    /// SCM: observational sample size.
    std::size_t n = 10000;
    /// Rollouts for `simulate` and, for O2O, the observational dataset.
    std::size_t runs = 300;
    std::vector<SweepRange> sweep;
    int steps = 0;
};

WorldSpec parse_world(const nlohmann::json& j, const std::filesystem::path& base = {});

/// Rollouts of the world's observational design.
std::vector<sim::RolloutLog> world_logs(const WorldSpec& spec, std::uint64_t seed);

/// A simulator, its observational dataset and, for SCM worlds, the truth.
struct World {
    std::shared_ptr<sim::Simulator> sim;
    data::Dataset ds;
    std::optional<GroundTruth> truth;
    std::string kind;
};

/// SCM worlds sample n units with seed derive_seed(seed, "observational");
/// O2O worlds turn world_logs into one row per rollout.
World load_world(const nlohmann::json& j, std::uint64_t seed, const std::filesystem::path& base = {});
World load_world(const WorldSpec& spec, std::uint64_t seed);

}  // namespace causeway::pipeline
