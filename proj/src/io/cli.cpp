#include "causeway/io/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "causeway/common.hpp"
#include "causeway/data/dataset.hpp"
#include "causeway/data/factor.hpp"
#include "causeway/discovery/pc.hpp"
#include "causeway/eval/metrics.hpp"
#include "causeway/explain/explain.hpp"
#include "causeway/graph/serialize.hpp"
#include "causeway/hypothesis/provider.hpp"
#include "causeway/intervene/intervene.hpp"
#include "causeway/io/validate.hpp"
#include "causeway/pipeline/pipeline.hpp"
#include "causeway/pipeline/world.hpp"
#include "causeway/random.hpp"
#include "causeway/refine/refine.hpp"
#include "causeway/sim/emergence.hpp"

namespace causeway::io {

namespace fs = std::filesystem;
using graph::MixedGraph;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string hash_of(const json& j) { return hex64(fnv1a(j.dump())); }

// Stamps tool version and a hash of the effective parameters on a report.
json stamped(json body, const json& params) {
    body["tool_version"] = std::string(kToolVersion);
    body["config_hash"] = hash_of(params);
    body["parameters"] = params;
    return body;
}

struct Common {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned jobs = 0;
    std::string out;
    json config = json::object();

    // Reads --config once all flags are parsed. Flags win over file values.
    void load() {
        if (!config_path.empty()) {
            config = read_json(config_path);
            if (!config.is_object()) throw ValidationError(config_path + ": expected an object");
            for (auto it = config.begin(); it != config.end(); ++it) {
                static const std::set<std::string> keys{"seed", "jobs", "out", "world", "worldviews", "pipeline"};
                if (!keys.contains(it.key())) throw ValidationError(config_path + ":/" + it.key() + ": unknown field");
            }
            if (!seed_given && config.contains("seed")) {
                if (!config["seed"].is_number_unsigned()) throw ValidationError(config_path + ":/seed: expected an integer");
                seed = config["seed"].get<std::uint64_t>();
            }
            if (jobs == 0 && config.contains("jobs")) {
                if (!config["jobs"].is_number_unsigned()) throw ValidationError(config_path + ":/jobs: expected an integer");
                jobs = config["jobs"].get<unsigned>();
            }
            if (out.empty() && config.contains("out")) out = config["out"].get<std::string>();
        }
        set_default_jobs(jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs);
    }

    fs::path config_dir() const { return config_path.empty() ? fs::path() : fs::path(config_path).parent_path(); }

    pipeline::PipelineConfig pipeline_config() const {
        pipeline::PipelineConfig c;
        if (config.contains("pipeline")) {
            try {
                c = pipeline::PipelineConfig::from_json(config["pipeline"]);
            } catch (const ValidationError& e) {
                throw ValidationError(config_path + ":/pipeline" + e.what());
            }
        }
        c.seed = seed;
        return c;
    }
};

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path);
    f << text;
}

void write_json(const json& j, const std::string& path, std::ostream& out) { write_text(j.dump(2) + "\n", path, out); }

MixedGraph graph_from(const json& j, const std::string& field = "") {
    if (j.is_object() && j.contains("schema")) {
        const std::string f = field.empty() ? "cpdag" : field;
        if (!j.contains(f)) throw ValidationError("report has no /" + f);
        return f == "e_y" ? graph::from_json(j.at("e_y").at("graph")) : graph::from_json(j.at(f));
    }
    if (j.is_object() && j.contains("graph") && j.contains("boundary")) return graph::from_json(j.at("graph"));
    return graph::from_json(j);
}

std::vector<intervene::InterventionScript> read_pool(const std::string& path) {
    const auto j = read_json(path);
    const json& list = j.is_object() && j.contains("scripts") ? j.at("scripts") : j;
    if (!list.is_array()) throw ValidationError(path + ": expected an array of scripts or {\"scripts\": [...]}");
    std::vector<intervene::InterventionScript> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        try {
            out.push_back(intervene::script_from_json(list[i]));
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":/scripts/" + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

pipeline::WorldSpec world_spec(const std::string& path, const Common& common) {
    if (!path.empty()) {
        try {
            return pipeline::parse_world(read_json(path), fs::path(path).parent_path());
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + e.what());
        }
    }
    if (common.config.contains("world")) {
        const auto& w = common.config["world"];
        if (w.is_string()) return world_spec((common.config_dir() / w.get<std::string>()).string(), Common{});
        try {
            return pipeline::parse_world(w, common.config_dir());
        } catch (const ValidationError& e) {
            throw ValidationError(common.config_path + ":/world" + e.what());
        }
    }
    throw ValidationError("no world: pass --world or set /world in --config");
}

std::string log_name(std::size_t i) {
    std::ostringstream s;
    s << "run_" << std::setw(5) << std::setfill('0') << i << ".jsonl";
    return s.str();
}

std::vector<std::string> expand_logs(const std::vector<std::string>& inputs) {
    std::vector<std::string> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.path().extension() == ".jsonl") found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(in);
        }
    }
    return files;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json names_json(const std::set<std::string>& s) { return json(std::vector<std::string>(s.begin(), s.end())); }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"causeway: local causal interfaces and minimal explanations for simulated worlds", "causeway"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    Common common;
    app.add_option("--config", common.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
    app.add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { common.seed = s, common.seed_given = true; }, "Top-level seed");
    app.add_option("--jobs", common.jobs, "Worker threads (default: hardware threads)");
    app.add_option("--out", common.out, "Output file or directory");
    app.fallthrough();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Roll out a world and write one JSONL log per run");
    std::string sim_world;
    std::size_t sim_runs = 0;
    simulate->add_option("--world", sim_world, "World description JSON")->check(CLI::ExistingFile);
    simulate->add_option("--runs", sim_runs, "Number of rollouts (default: the world's)");

    // features
    auto* features = app.add_subcommand("features", "Turn rollout logs into a dataset CSV");
    std::vector<std::string> feat_logs;
    features->add_option("logs", feat_logs, "Log files or directories")->required();

    // discover
    auto* discover = app.add_subcommand("discover", "Learn a CPDAG from a dataset");
    std::string disc_data, disc_vars, disc_bk;
    double disc_alpha = 0.0;
    discover->add_option("--data", disc_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    discover->add_option("--vars", disc_vars, "Comma-separated variables (default: all columns)");
    discover->add_option("--background", disc_bk, "Background knowledge JSON")->check(CLI::ExistingFile);
    discover->add_option("--alpha", disc_alpha, "CI test level");

    // refine
    auto* refine_cmd = app.add_subcommand("refine", "Refine a factor set to a Markov boundary");
    std::string ref_data, ref_target, ref_specs;
    refine_cmd->add_option("--data", ref_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    refine_cmd->add_option("--target", ref_target, "Outcome column")->required();
    refine_cmd->add_option("--specs", ref_specs, "Factor specs JSON (array)")->check(CLI::ExistingFile);

    // intervene
    auto* intervene_cmd = app.add_subcommand("intervene", "Run paired intervention scripts");
    std::string int_world, int_scripts, int_edge, int_response = "y";
    intervene_cmd->add_option("--world", int_world, "World description JSON")->check(CLI::ExistingFile);
    intervene_cmd->add_option("--scripts", int_scripts, "Script pool JSON")->check(CLI::ExistingFile);
    intervene_cmd->add_option("--edge", int_edge, "Adjudicate one edge A,B with do: probes");
    intervene_cmd->add_option("--response", int_response, "Response feature for scripts");

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "Extract E_Y from a worldview and a boundary");
    std::vector<std::string> exp_worldviews;
    std::string exp_boundary, exp_target, exp_bk, exp_graph, exp_dot;
    explain_cmd->add_option("--worldview", exp_worldviews, "Worldview JSON files")->required();
    explain_cmd->add_option("--boundary", exp_boundary, "Comma-separated boundary")->required();
    explain_cmd->add_option("--target", exp_target, "Outcome (default: the worldview's)");
    explain_cmd->add_option("--background", exp_bk, "Confirmed knowledge JSON")->check(CLI::ExistingFile);
    explain_cmd->add_option("--graph", exp_graph, "Learned local graph JSON")->check(CLI::ExistingFile);
    explain_cmd->add_option("--dot", exp_dot, "Also write E_Y as DOT here");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a learned graph against the truth");
    std::string ev_pred, ev_truth, ev_target, ev_boundary;
    evaluate_cmd->add_option("--pred", ev_pred, "Learned graph or run report")->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--truth", ev_truth, "True graph or SCM model")->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--target", ev_target, "Outcome (default: the model's or the report's)");
    evaluate_cmd->add_option("--boundary", ev_boundary, "Comma-separated found boundary");

    // rank
    auto* rank_cmd = app.add_subcommand("rank", "Rank intervention scripts by random walk with restart");
    std::string rank_graph, rank_pool, rank_target, rank_labels, rank_world;
    int rank_k = 5;
    rank_cmd->add_option("--graph", rank_graph, "Graph or run report")->required()->check(CLI::ExistingFile);
    rank_cmd->add_option("--pool", rank_pool, "Script pool JSON")->required()->check(CLI::ExistingFile);
    rank_cmd->add_option("--target", rank_target, "Outcome (default: the report's)");
    rank_cmd->add_option("--labels", rank_labels, "Success labels JSON {id: bool}")->check(CLI::ExistingFile);
    rank_cmd->add_option("--world", rank_world, "Label the pool on this world instead")->check(CLI::ExistingFile);
    rank_cmd->add_option("--k", rank_k, "Cutoff K");

    // pipeline
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Run the full loop and write a report");
    std::string pl_world, pl_query = "what drives the outcome", pl_resume;
    std::vector<std::string> pl_worldviews;
    pipeline_cmd->add_option("--world", pl_world, "World description JSON")->check(CLI::ExistingFile);
    pipeline_cmd->add_option("--worldview", pl_worldviews, "Worldview JSON files (else the remote provider)");
    pipeline_cmd->add_option("--query", pl_query, "Question passed to the provider");
    pipeline_cmd->add_option("--resume", pl_resume, "Checkpoint to resume from")->check(CLI::ExistingFile);

    // export-dot
    auto* dot_cmd = app.add_subcommand("export-dot", "Write a graph as DOT");
    std::string dot_graph, dot_field;
    dot_cmd->add_option("--graph", dot_graph, "Graph, E_Y or run report")->required()->check(CLI::ExistingFile);
    dot_cmd->add_option("--field", dot_field, "Report field: e_y (default), cpdag or projected");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Check files against the graph/worldview/script/report schemas");
    std::vector<std::string> val_paths;
    std::string val_kind;
    validate_cmd->add_option("paths", val_paths, "Files to check")->required();
    validate_cmd->add_option("--kind", val_kind, "graph, worldview, script or report (default: detect)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        common.load();
        const auto& o = common.out;

        if (*simulate) {
            auto spec = world_spec(sim_world, common);
            if (sim_runs > 0) spec.runs = sim_runs;
            if (o.empty()) throw ValidationError("simulate needs --out <directory>");
            const auto logs = pipeline::world_logs(spec, common.seed);
            fs::create_directories(o);
            for (std::size_t i = 0; i < logs.size(); ++i)
                write_text(logs[i].to_jsonl(), (fs::path(o) / log_name(i)).string(), out);
            write_json(stamped({{"world", logs.empty() ? "" : logs.front().world}, {"runs", logs.size()}},
                               {{"seed", common.seed}, {"runs", spec.runs}, {"world", sim_world}}),
                       (fs::path(o) / "manifest.json").string(), out);
            return kExitOk;
        }

        if (*features) {
            std::vector<sim::RolloutLog> logs;
            for (const auto& f : expand_logs(feat_logs)) {
                try {
                    logs.push_back(sim::RolloutLog::from_jsonl(slurp(f)));
                } catch (const ValidationError& e) {
                    throw ValidationError(f + ": " + e.what());
                }
            }
            if (logs.empty()) throw ValidationError("features: no logs found");
            write_text(data::to_csv(sim::logs_to_dataset(logs)), o, out);
            return kExitOk;
        }

        if (*discover) {
            const auto ds = data::read_csv(disc_data);
            auto cfg = common.pipeline_config();
            if (disc_alpha > 0) cfg.alpha = disc_alpha;
            cfg.validate();
            const auto vars = disc_vars.empty() ? ds.names() : split_list(disc_vars);
            discovery::BackgroundKnowledge bk;
            if (!disc_bk.empty()) bk = discovery::bk_from_json(read_json(disc_bk));
            discovery::PcOptions popts;
            popts.alpha = cfg.alpha;
            popts.max_cond = cfg.max_cond;
            popts.bins = cfg.bins;
            const auto r = discovery::pc_learn_detailed(ds, vars, bk, popts);
            for (const auto& n : r.notes) err << "note: " << n << "\n";
            write_json(graph::to_json(r.cpdag), o, out);
            return kExitOk;
        }

        if (*refine_cmd) {
            auto ds = data::read_csv(ref_data);
            const auto cfg = common.pipeline_config();
            auto ropts = cfg.refine;
            ropts.bins = cfg.bins;
            ropts.seed = derive_seed(cfg.seed, "refine");
            std::vector<refine::Candidate> candidates;
            for (const auto& n : ds.names())
                if (n != ref_target) candidates.push_back({n, std::nullopt});
            if (!ref_specs.empty()) {
                const auto j = read_json(ref_specs);
                if (!j.is_array()) throw ValidationError(ref_specs + ": expected an array of factor specs");
                for (const auto& s : j) {
                    auto spec = data::factor_from_json(s);
                    candidates.push_back({spec.name, spec});
                }
            }
            auto state = refine::initial_state(ds, ref_target, {}, ropts);
            json rounds = json::array();
            for (int r = 0; r < cfg.max_refine_rounds; ++r) {
                auto next = refine::refine_round(state, candidates, ds, ref_target, ropts);
                const bool settled = next.active == state.active;
                state = std::move(next);
                rounds.push_back(refine::round_record(state));
                if (settled) break;
            }
            const auto [p, c] = refine::estimate_pc(state.f_trajectory, cfg.epsilon);
            write_json(stamped({{"target", ref_target},
                                {"boundary", state.boundary},
                                {"rounds", rounds},
                                {"f_trajectory", state.f_trajectory},
                                {"p_hat", p},
                                {"c_hat", c}},
                               {{"data", ref_data}, {"specs", ref_specs}, {"pipeline", cfg.to_json()}}),
                       o, out);
            return kExitOk;
        }

        if (*intervene_cmd) {
            const auto spec = world_spec(int_world, common);
            const auto cfg = common.pipeline_config();
            json results = json::array();
            if (!int_edge.empty()) {
                const auto ends = split_list(int_edge);
                if (ends.size() != 2) throw ValidationError("--edge expects A,B");
                intervene::InterventionScript base;
                base.id = "probe";
                base.knob = "do:";
                base.level = cfg.probe_level;
                base.reference = cfg.probe_reference;
                for (int i = 0; i < cfg.probe_seeds; ++i)
                    base.seeds.push_back(derive_seed(cfg.seed, fnv1a("probe"), static_cast<std::uint64_t>(i)));
                base.replications = cfg.probe_replications;
                base.configs = cfg.probe_configs;
                results.push_back(intervene::to_json(intervene::adjudicate_edge(
                    *spec.sim, {ends[0], ends[1]}, base, cfg.adjudication_alpha, cfg.steps)));
            }
            if (!int_scripts.empty()) {
                for (const auto& s : read_pool(int_scripts)) {
                    const auto run = intervene::run_paired(*spec.sim, s, cfg.steps);
                    json r{{"id", s.id}, {"target", s.target}, {"knob", s.knob}, {"infeasible", run.infeasible}};
                    if (run.infeasible) {
                        r["reason"] = run.reason;
                    } else {
                        const auto effects = intervene::effects_by_config(run, s.configs.size(), int_response);
                        const auto verdict = intervene::adjudicate(effects, cfg.adjudication_alpha);
                        json configs = json::array();
                        for (const auto& e : effects) configs.push_back(intervene::to_json(e));
                        r["configs"] = configs;
                        r["verdict"] = intervene::to_string(verdict.verdict);
                    }
                    results.push_back(r);
                }
            }
            if (int_edge.empty() && int_scripts.empty()) throw ValidationError("intervene needs --scripts or --edge");
            write_json(stamped({{"results", results}},
                               {{"seed", common.seed}, {"scripts", int_scripts}, {"edge", int_edge},
                                {"response", int_response}, {"pipeline", cfg.to_json()}}),
                       o, out);
            return kExitOk;
        }

        if (*explain_cmd) {
            hypothesis::FileProvider provider(exp_worldviews);
            const auto w = provider.integrate(provider.parse("", {}));
            const auto target = exp_target.empty() ? w.target : exp_target;
            if (target.empty()) throw ValidationError("explain needs --target or a worldview target");
            discovery::BackgroundKnowledge bk;
            if (!exp_bk.empty()) bk = discovery::bk_from_json(read_json(exp_bk));
            const auto list = split_list(exp_boundary);
            const std::set<std::string> boundary(list.begin(), list.end());
            const auto gw = explain::enforce_constraints(w.mechanism, bk);
            std::set<std::string> roots;
            for (const auto& r : w.effective_roots())
                if (gw.has_vertex(r)) roots.insert(r);
            auto keep = boundary;
            keep.insert(target);
            MixedGraph local;
            if (!exp_graph.empty()) {
                const auto g = graph_from(read_json(exp_graph));
                std::set<std::string> present;
                for (const auto& n : keep)
                    if (g.has_vertex(n)) present.insert(n);
                local = g.induced(present);
            } else {
                std::set<std::string> present;
                for (const auto& n : keep)
                    if (gw.has_vertex(n)) present.insert(n);
                local = gw.induced(present);
            }
            auto e = explain::assemble_e_y(explain::conn_min(gw, roots, boundary, bk), boundary, target, local, roots, bk);
            e.source = gw;
            const auto m = explain::verify_minimality(e);
            if (!exp_dot.empty())
                write_text(graph::to_dot(e.graph, {"E_Y", e.boundary, e.target}), exp_dot, out);
            auto body = explain::to_json(e);
            body["worldview"] = w.id;
            body["minimality"] = {{"pass", m.pass}, {"violations", m.violations}};
            write_json(stamped(body, {{"worldviews", exp_worldviews}, {"boundary", exp_boundary}, {"target", target}}),
                       o, out);
            return kExitOk;
        }

        if (*evaluate_cmd) {
            const auto pj = read_json(ev_pred);
            const auto tj = read_json(ev_truth);
            auto pred = graph_from(pj);
            MixedGraph truth;
            std::optional<pipeline::GroundTruth> gt;
            std::string target = ev_target;
            if (tj.is_object() && tj.contains("nodes")) {
                const auto m = sim::ScmModel::from_json(tj);
                truth = m.dag();
                gt = pipeline::GroundTruth{m.dag(), m.markov_boundary(), m.ancestors()};
                if (target.empty()) target = m.target();
            } else {
                truth = graph::from_json(tj);
            }
            if (target.empty() && pj.is_object() && pj.contains("target")) target = pj["target"].get<std::string>();
            std::set<std::string> found;
            if (!ev_boundary.empty()) {
                const auto l = split_list(ev_boundary);
                found = {l.begin(), l.end()};
            } else if (pj.is_object() && pj.contains("markov_boundary")) {
                found = pj["markov_boundary"].get<std::set<std::string>>();
            }
            json body;
            if (gt && !target.empty()) {
                body = pipeline::evaluate(pred, found, target, *gt);
            } else {
                for (const auto& n : truth.names())
                    if (!pred.has_vertex(n)) pred.add_vertex(n);
                body["structure"] = eval::to_json(eval::structure_report(pred, truth));
                if (!target.empty()) body["ancestors"] = eval::to_json(eval::ancestor_f1(pred, truth, target));
            }
            body["target"] = target;
            write_json(stamped(body, {{"pred", ev_pred}, {"truth", ev_truth}, {"target", target},
                                      {"boundary", names_json(found)}}),
                       o, out);
            return kExitOk;
        }

        if (*rank_cmd) {
            const auto gj = read_json(rank_graph);
            const auto g = graph_from(gj);
            std::string target = rank_target;
            if (target.empty() && gj.is_object() && gj.contains("target")) target = gj["target"].get<std::string>();
            if (target.empty()) throw ValidationError("rank needs --target");
            const auto pool = read_pool(rank_pool);
            const auto cfg = common.pipeline_config();
            std::map<std::string, bool> labels;
            json label_json = json::object();
            if (!rank_world.empty()) {
                const auto spec = world_spec(rank_world, common);
                for (const auto& l : intervene::label_pool(*spec.sim, pool, {}, cfg.adjudication_alpha, "y", cfg.steps)) {
                    labels[l.id] = l.success;
                    label_json[l.id] = {{"success", l.success}, {"infeasible", l.infeasible}, {"p_value", l.p_value},
                                        {"mean_shift", l.mean_shift}};
                }
            } else if (!rank_labels.empty()) {
                labels = read_json(rank_labels).get<std::map<std::string, bool>>();
                for (const auto& [k, v] : labels) label_json[k] = {{"success", v}};
            } else {
                throw ValidationError("rank needs --labels or --world");
            }
            std::vector<eval::ScriptRef> refs;
            for (const auto& s : pool) refs.push_back({s.id, s.target});
            const auto ranked = eval::rank_scripts(refs, eval::rwr_scores(g, target, cfg.restart), g);
            std::vector<std::string> ids;
            json order = json::array();
            for (const auto& r : ranked) {
                ids.push_back(r.id);
                order.push_back(json{{"id", r.id}, {"node", r.node}, {"score", r.score}, {"mapped", r.mapped}});
            }
            auto body = eval::to_json(eval::rank_metrics(ids, labels, rank_k));
            body["scores"] = order;
            body["labels"] = label_json;
            body["target"] = target;
            write_json(stamped(body, {{"graph", rank_graph}, {"pool", rank_pool}, {"k", rank_k},
                                      {"restart", cfg.restart}, {"seed", common.seed}}),
                       o, out);
            return kExitOk;
        }

        if (*pipeline_cmd) {
            if (o.empty()) throw ValidationError("pipeline needs --out <directory>");
            const auto spec = world_spec(pl_world, common);
            const auto cfg = common.pipeline_config();
            auto files = pl_worldviews;
            if (files.empty() && common.config.contains("worldviews"))
                for (const auto& f : common.config["worldviews"])
                    files.push_back((common.config_dir() / f.get<std::string>()).string());
            auto provider = hypothesis::make_provider(files);
            auto world = pipeline::load_world(spec, common.seed);
            fs::create_directories(o);
            const auto checkpoint_path = (fs::path(o) / "checkpoint.json").string();
            std::optional<json> resume;
            if (!pl_resume.empty()) resume = read_json(pl_resume);
            const auto result = pipeline::run_pipeline(
                *world.sim, *provider, std::move(world.ds), pl_query, cfg, world.truth,
                [&](const json& j) { write_json(j, checkpoint_path, out); }, resume);
            write_json(result.report, (fs::path(o) / "report.json").string(), out);
            const auto& e = *result.state.e_y;
            write_text(graph::to_dot(e.graph, {"E_Y", e.boundary, e.target}), (fs::path(o) / "e_y.dot").string(), out);
            write_text(graph::to_dot(result.state.cpdag, {"CPDAG", result.state.boundary, result.state.target}),
                       (fs::path(o) / "cpdag.dot").string(), out);
            err << "markov boundary: " << json(result.state.boundary).dump() << "\n";
            if (result.state.budget_exhausted) {
                err << "rollout budget exhausted after " << result.state.rollouts_used
                    << " rollouts; partial results written\n";
                return kExitBudget;
            }
            return kExitOk;
        }

        if (*dot_cmd) {
            const auto j = read_json(dot_graph);
            std::string field = dot_field.empty() ? "e_y" : dot_field;
            graph::DotStyle style;
            if (j.is_object() && j.contains("schema")) {
                style.target = j.value("target", std::string());
                style.highlighted = j.value("markov_boundary", std::set<std::string>());
            } else if (j.is_object() && j.contains("graph") && j.contains("boundary")) {
                style.target = j.value("target", std::string());
                style.highlighted = j["boundary"].get<std::set<std::string>>();
            }
            write_text(graph::to_dot(graph_from(j, field), style), o, out);
            return kExitOk;
        }

        if (*validate_cmd) {
            json reports = json::array();
            bool pass = true;
            for (const auto& p : val_paths) {
                const auto r = val_kind.empty() ? validate_file(p) : validate_file(p, parse_kind(val_kind));
                auto j = to_json(r);
                j["path"] = p;
                reports.push_back(j);
                pass = pass && r.pass;
                err << (r.pass ? "pass " : "FAIL ") << p << " (" << to_string(r.kind) << ")\n";
                for (const auto& e : r.errors) err << "  " << e << "\n";
            }
            write_json(reports, o, out);
            return pass ? kExitOk : kExitValidation;
        }
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const discovery::ConstraintConflict& e) {
        err << "constraint conflict: " << e.what() << "\n";
        return kExitValidation;
    } catch (const hypothesis::ProviderError& e) {
        err << "provider error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace causeway::io
