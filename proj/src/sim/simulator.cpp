#include "causeway/sim/simulator.hpp"

#include <sstream>

#include "causeway/common.hpp"

namespace causeway::sim {

std::string RolloutLog::to_jsonl() const {
    std::string out;
    for (const auto& e : events) out += e.dump() + '\n';
    nlohmann::json summary_record = {{"type", "summary"},
                                     {"world", world},
                                     {"seed", seed},
                                     {"config_hash", config_hash},
                                     {"features", summary},
                                     {"flags", flags}};
    summary_record["y"] = y ? nlohmann::json(*y) : nlohmann::json(nullptr);
    out += summary_record.dump() + '\n';
    return out;
}

RolloutLog RolloutLog::from_jsonl(const std::string& text) {
    RolloutLog log;
    std::istringstream in(text);
    std::string line;
    bool have_summary = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("rollout log line " + std::to_string(lineno) + ": " + e.what());
        }
        if (have_summary) throw ValidationError("rollout log line " + std::to_string(lineno) + ": data after summary");
        if (j.value("type", "") == "summary") {
            have_summary = true;
            log.world = j.at("world").get<std::string>();
            log.seed = j.at("seed").get<std::uint64_t>();
            log.config_hash = j.at("config_hash").get<std::string>();
            log.summary = j.at("features").get<std::map<std::string, double>>();
            log.flags = j.at("flags").get<std::vector<std::string>>();
            if (!j.at("y").is_null()) log.y = j.at("y").get<double>();
        } else {
            log.events.push_back(std::move(j));
        }
    }
    if (!have_summary) throw ValidationError("rollout log: missing summary record");
    return log;
}

RolloutLog rollout(const Simulator& prototype, std::uint64_t seed, const Settings& settings, int steps) {
    auto sim = prototype.clone();
    sim->init(seed);
    for (const auto& [knob, value] : settings) sim->clamp(knob, value);
    const int n = steps > 0 ? steps : sim->default_steps();
    for (int i = 0; i < n; ++i) sim->step();
    return sim->log();
}

}  // namespace causeway::sim
