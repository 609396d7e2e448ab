#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace causeway::sim {

/// The simulator cannot realize a requested knob change.
class InfeasibleKnob : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Record of one rollout: per-step events, run-level summary features and the
/// outcome. Serialized as JSON lines (events first, summary record last).
struct RolloutLog {
    std::string world;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<nlohmann::json> events;
    /// Run-level features, one value per name.
    std::map<std::string, double> summary;
    /// Run-level outcome; absent for degenerate runs.
    std::optional<double> y;
    std::vector<std::string> flags;

    std::string to_jsonl() const;
    static RolloutLog from_jsonl(const std::string& text);
    friend bool operator==(const RolloutLog&, const RolloutLog&) = default;
};

/// Knob settings applied in order right after init.
using Settings = std::vector<std::pair<std::string, double>>;

/// Contract every world implements. Identical (config, seed, clamp schedule)
/// must give an identical log; a clamp touches only the named mechanism.
class Simulator {
public:
    virtual ~Simulator() = default;

    virtual std::string world() const = 0;
    virtual void init(std::uint64_t seed) = 0;
    virtual void step() = 0;
    virtual int default_steps() const = 0;
    virtual std::vector<std::string> knobs() const = 0;
    virtual bool knob_valid(const std::string& knob) const = 0;
    /// Throws InfeasibleKnob for knobs the world cannot realize.
    virtual void clamp(const std::string& knob, double value) = 0;
    virtual nlohmann::json snapshot() const = 0;
    virtual void restore(const nlohmann::json& state) = 0;
    virtual RolloutLog log() const = 0;
    virtual std::unique_ptr<Simulator> clone() const = 0;
};

/// Fresh clone, init(seed), settings, then `steps` steps (default_steps()
/// when steps <= 0).
RolloutLog rollout(const Simulator& prototype, std::uint64_t seed, const Settings& settings = {}, int steps = 0);

}  // namespace causeway::sim
