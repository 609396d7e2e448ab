#include "causeway/pipeline/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "causeway/common.hpp"
#include "causeway/random.hpp"
#include "causeway/sim/emergence.hpp"
#include "causeway/sim/o2o.hpp"
#include "causeway/sim/scm.hpp"

namespace causeway::pipeline {

using nlohmann::json;

std::vector<sim::RolloutLog> observational_logs(const sim::Simulator& sim, std::size_t runs, std::uint64_t seed,
                                                const std::vector<SweepRange>& sweep, int steps) {
    for (const auto& r : sweep) {
        if (!sim.knob_valid(r.knob)) throw ValidationError("sweep: unknown knob '" + r.knob + "'");
        if (!(r.lo <= r.hi)) throw ValidationError("sweep: " + r.knob + " needs lo <= hi");
    }
    std::vector<sim::RolloutLog> logs(runs);
    parallel_for(runs, default_jobs(), [&](std::size_t i) {
        Stream design(derive_seed(seed, fnv1a("design"), i));
        sim::Settings settings;
        for (const auto& r : sweep) {
            const double v = r.integer ? std::floor(design.uniform(r.lo, r.hi + 1.0)) : design.uniform(r.lo, r.hi);
            settings.emplace_back(r.knob, std::min(v, r.hi));
        }
        logs[i] = sim::rollout(sim, derive_seed(seed, fnv1a("observational"), i), settings, steps);
    });
    return logs;
}

namespace {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": malformed JSON: " + e.what());
    }
}

template <class T>
T number(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ValidationError(std::string("/") + key + ": expected a non-negative integer");
    } else if (!v.is_number()) {
        throw ValidationError(std::string("/") + key + ": expected a number");
    }
    return v.get<T>();
}

void only_keys(const json& j, std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
            throw ValidationError("/" + it.key() + ": unknown field");
}

}  // namespace

WorldSpec parse_world(const json& j, const std::filesystem::path& base) {
    if (!j.is_object() || !j.contains("world") || !j["world"].is_string())
        throw ValidationError("/world: expected \"scm\" or \"o2o\"");
    WorldSpec w;
    w.kind = j["world"].get<std::string>();
    if (w.kind == "scm") {
        only_keys(j, {"world", "model", "n", "units_per_rollout", "runs"});
        if (!j.contains("model")) throw ValidationError("/model: missing required field");
        json model = j["model"];
        if (model.is_string()) model = read_json(base / model.get<std::string>());
        try {
            w.model = sim::ScmModel::from_json(model);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("/model") + e.what());
        }
        w.n = number<std::size_t>(j, "n", 10000);
        w.runs = number<std::size_t>(j, "runs", 100);
        const int units = number<int>(j, "units_per_rollout", 1);
        if (units < 1) throw ValidationError("/units_per_rollout: must be >= 1");
        w.sim = std::make_shared<sim::ScmSimulator>(*w.model, units);
    } else if (w.kind == "o2o") {
        only_keys(j, {"world", "o2o", "runs", "sweep", "steps"});
        try {
            w.sim = std::make_shared<sim::O2OSimulator>(sim::O2OConfig::from_json(j.value("o2o", json::object())));
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("/o2o") + e.what());
        }
        if (j.contains("sweep")) {
            if (!j["sweep"].is_array()) throw ValidationError("/sweep: expected an array");
            for (std::size_t i = 0; i < j["sweep"].size(); ++i) {
                const auto& r = j["sweep"][i];
                const std::string p = "/sweep/" + std::to_string(i);
                if (!r.is_object() || !r.contains("knob") || !r["knob"].is_string() || !r.contains("lo") ||
                    !r["lo"].is_number() || !r.contains("hi") || !r["hi"].is_number())
                    throw ValidationError(p + ": expected {knob, lo, hi}");
                w.sweep.push_back({r["knob"].get<std::string>(), r["lo"].get<double>(), r["hi"].get<double>(),
                                   r.value("integer", false)});
                if (!w.sim->knob_valid(w.sweep.back().knob))
                    throw ValidationError(p + "/knob: unknown knob '" + w.sweep.back().knob + "'");
            }
        }
        w.runs = number<std::size_t>(j, "runs", 300);
        w.steps = number<int>(j, "steps", 0);
    } else {
        throw ValidationError("/world: unknown world '" + w.kind + "'");
    }
    return w;
}

std::vector<sim::RolloutLog> world_logs(const WorldSpec& spec, std::uint64_t seed) {
    return observational_logs(*spec.sim, spec.runs, seed, spec.sweep, spec.steps);
}

World load_world(const WorldSpec& spec, std::uint64_t seed) {
    World w;
    w.kind = spec.kind;
    w.sim = spec.sim;
    if (spec.model) {
        w.ds = sim::scm_sample(*spec.model, spec.n, derive_seed(seed, "observational"));
        w.truth = GroundTruth{spec.model->dag(), spec.model->markov_boundary(), spec.model->ancestors()};
    } else {
        w.ds = sim::logs_to_dataset(world_logs(spec, seed));
    }
    return w;
}

World load_world(const json& j, std::uint64_t seed, const std::filesystem::path& base) {
    return load_world(parse_world(j, base), seed);
}

}  // namespace causeway::pipeline
