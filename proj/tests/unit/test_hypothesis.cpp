#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "causeway/common.hpp"
#include "causeway/graph/algorithms.hpp"
#include "causeway/hypothesis/provider.hpp"
#include "causeway/hypothesis/worldview.hpp"
#include "causeway/random.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines _res as a macro.
#include <httplib.h>

using namespace causeway;
using namespace causeway::hypothesis;
using intervene::EdgeAdjudication;
using intervene::Orientation;
using intervene::Verdict;

namespace {

Worldview build(std::string id, const std::vector<std::string>& names,
                const std::vector<std::tuple<std::string, std::string, double>>& links) {
    Worldview w;
    w.id = std::move(id);
    for (const auto& n : names) w.variables.push_back({n, "", graph::Scale::unknown, VariableStatus::observable, {}});
    for (const auto& [a, b, s] : links) w.links.push_back({a, b, {{"because", "", "", s}}});
    w.mechanism = mechanism_from_links(w.variables, w.links);
    validate(w);
    return w;
}

EdgeAdjudication evidence(std::string a, std::string b, Verdict v, Orientation o) {
    EdgeAdjudication e;
    e.pair = {std::move(a), std::move(b)};
    e.verdict = v;
    e.orientation = o;
    return e;
}

// Stage II fixture: a beats b, b beats c, c beats a.
class CycleJudge : public Judge {
public:
    explicit CycleJudge(bool resolve) : resolve_(resolve) {}
    double rubric(const Worldview&) const override { return 5.0; }
    int compare(const Worldview& a, const Worldview& b) const override {
        static const std::map<std::string, std::string> beats{{"a", "b"}, {"b", "c"}, {"c", "a"}};
        if (beats.at(a.id) == b.id) return 1;
        if (beats.at(b.id) == a.id) return -1;
        return 0;
    }
    std::vector<std::string> rank_all(const std::vector<const Worldview*>&) const override {
        if (resolve_) return {"c", "a", "b"};
        return {};
    }

private:
    bool resolve_;
};

}  // namespace

TEST_CASE("worldview json round trip") {
    auto w = build("w1", {"A", "B", "Y"}, {{"A", "B", 0.7}, {"B", "Y", 0.4}});
    w.target = "Y";
    w.roots = {"A"};
    w.forbidden.insert({"Y", "A"});
    data::FactorSpec spec;
    spec.name = "R";
    spec.kind = data::FactorTemplate::ratio;
    spec.inputs = {"A", "B"};
    w.variables.push_back({"R", "ratio", graph::Scale::meso, VariableStatus::constructible, spec});
    w.mechanism = mechanism_from_links(w.variables, w.links);
    validate(w);
    const auto back = worldview_from_json(to_json(w));
    CHECK(back == w);
    CHECK(to_json(back) == to_json(w));

    causeway::Stream rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(6));
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
        std::vector<std::tuple<std::string, std::string, double>> links;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.bernoulli(0.4)) links.push_back({names[i], names[j], rng.uniform()});
        const auto r = build("r" + std::to_string(trial), names, links);
        CHECK(worldview_from_json(to_json(r)) == r);
    }
}

TEST_CASE("worldview schema errors carry a pointer") {
    auto j = to_json(build("w", {"A", "B"}, {{"A", "B", 0.5}}));
    auto bad = j;
    bad["competition_relationship"][0]["explanations"][0]["support_estimation"] = 1.5;
    try {
        worldview_from_json(bad);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("/competition_relationship/0/explanations/0/support_estimation") !=
              std::string::npos);
    }
    auto ghost = j;
    ghost["competition_relationship"][0]["target"] = "Q";
    CHECK_THROWS_WITH_AS(worldview_from_json(ghost), doctest::Contains("/competition_relationship/0/target"),
                         ValidationError);
    auto noexp = j;
    noexp["competition_relationship"][0]["explanations"] = nlohmann::json::array();
    CHECK_THROWS_AS(worldview_from_json(noexp), ValidationError);
    auto nospec = j;
    nospec["unified_indicators"][0]["status"] = "constructible";
    CHECK_THROWS_WITH_AS(worldview_from_json(nospec), doctest::Contains("/unified_indicators/0/factor"),
                         ValidationError);
    auto cyc = build("c", {"A", "B", "C"}, {{"A", "B", 0.5}, {"B", "C", 0.5}});
    cyc.links.push_back({"C", "A", {{"t", "", "", 0.5}}});
    auto cj = to_json(cyc);
    cj.erase("mechanism_graph");
    CHECK_THROWS_WITH_AS(worldview_from_json(cj), doctest::Contains("cycle"), ValidationError);
}

TEST_CASE("rule judge selection") {
    const auto strong = build("strong", {"A", "B"}, {{"A", "B", 0.9}});
    const auto weak = build("weak", {"A", "B"}, {{"A", "B", 0.2}});
    RuleJudge judge;
    CHECK(judge.rubric(strong) == doctest::Approx(1 + 9 * 0.9));
    CHECK(select_worldview({weak, strong}, judge).id == "strong");
    CHECK(select_worldview({weak}, judge) == weak);
    CHECK_THROWS_AS(select_worldview({}, judge), ValidationError);

    // Equal rubrics: id order decides, deterministically.
    const auto twin = build("a-twin", {"A", "B"}, {{"A", "B", 0.9}});
    const auto s = select_worldview_detailed({strong, twin, weak}, judge);
    CHECK(s.chosen == "a-twin");
    CHECK(s.cycle);
    CHECK(select_worldview_detailed({strong, twin, weak}, judge).chosen == s.chosen);
}

TEST_CASE("preference cycle fallback") {
    const auto a = build("a", {"A"}, {}), b = build("b", {"A"}, {}), c = build("c", {"A"}, {});
    const auto resolved = select_worldview_detailed({a, b, c}, CycleJudge(true), 3);
    CHECK(resolved.cycle);
    CHECK(resolved.chosen == "c");
    const auto fallback = select_worldview_detailed({b, c, a}, CycleJudge(false), 3);
    CHECK(fallback.chosen == "a");
    CHECK(fallback.wins.at("a") == 1);
}

TEST_CASE("node adaptation report") {
    auto ds = data::make_dataset({{"a", {1, 2, 3}}, {"b", {2, 2, 4}}});
    Worldview w = build("w", {"a", "b"}, {});
    data::FactorSpec ratio;
    ratio.name = "r";
    ratio.kind = data::FactorTemplate::ratio;
    ratio.inputs = {"a", "b"};
    data::FactorSpec nested = ratio;
    nested.name = "n";
    nested.kind = data::FactorTemplate::difference;
    nested.inputs = {"r", "a"};
    data::FactorSpec broken = ratio;
    broken.name = "z";
    broken.inputs = {"a", "missing"};
    w.variables.push_back({"r", "", graph::Scale::meso, VariableStatus::constructible, ratio});
    w.variables.push_back({"n", "", graph::Scale::meso, VariableStatus::constructible, nested});
    w.variables.push_back({"z", "", graph::Scale::meso, VariableStatus::constructible, broken});
    w.variables.push_back({"mood", "", graph::Scale::micro, VariableStatus::uncertain, {}});
    const auto report = validate_worldview(w, ds);
    std::map<std::string, NodeStatus> by;
    for (const auto& n : report.nodes) by[n.name] = n;
    CHECK(by["a"].status == VariableStatus::observable);
    CHECK(by["r"].status == VariableStatus::constructible);
    CHECK(by["n"].status == VariableStatus::constructible);
    CHECK(by["z"].status == VariableStatus::uncertain);
    CHECK(by["z"].reason.find("missing") != std::string::npos);
    CHECK(by["mood"].status == VariableStatus::uncertain);
    CHECK(report.uncertain == std::vector<std::string>{"z", "mood"});
}

TEST_CASE("contradiction flips and demotes") {
    const auto w = build("w", {"X", "Z", "Y"}, {{"Z", "X", 0.8}, {"X", "Y", 0.6}});
    const auto e = evidence("X", "Z", Verdict::confirmed, Orientation::source_to_target);
    CHECK(contradicts(w, e));
    const auto r = apply_contradiction(w, e);
    CHECK(r.mechanism.has_directed("X", "Z"));
    CHECK_FALSE(r.mechanism.has_directed("Z", "X"));
    REQUIRE(r.link("X", "Z") != nullptr);
    CHECK(r.link("X", "Z")->explanations[0].support == doctest::Approx(0.4));
    CHECK_FALSE(r.history.empty());

    const auto agree = evidence("Z", "X", Verdict::confirmed, Orientation::source_to_target);
    CHECK_FALSE(contradicts(w, agree));
    CHECK(apply_contradiction(w, agree) == w);
}

TEST_CASE("refuted edges are removed and alternatives promoted") {
    const auto w = build("w", {"A", "B", "Y"}, {{"A", "Y", 0.8}, {"B", "Y", 0.4}});
    const auto r = apply_contradiction(w, evidence("A", "Y", Verdict::refuted, Orientation::undetermined));
    CHECK_FALSE(r.mechanism.adjacent("A", "Y"));
    CHECK(r.link("A", "Y")->explanations[0].support == doctest::Approx(0.4));
    // The 0.4 taken from A -> Y moves to B -> Y.
    CHECK(r.link("B", "Y")->explanations[0].support == doctest::Approx(0.8));
}

TEST_CASE("contradictions never create cycles") {
    // C -> B would close C -> B -> A -> C, so the flip becomes a removal.
    const auto w = build("w", {"A", "B", "C"}, {{"B", "C", 0.5}, {"B", "A", 0.5}, {"A", "C", 0.5}});
    const auto r = apply_contradiction(w, evidence("C", "B", Verdict::confirmed, Orientation::source_to_target));
    CHECK(graph::is_acyclic(r.mechanism));
    CHECK_FALSE(r.mechanism.adjacent("B", "C"));

    causeway::Stream rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(5));
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
        std::vector<std::tuple<std::string, std::string, double>> links;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.bernoulli(0.5)) links.push_back({names[i], names[j], rng.uniform()});
        auto cur = build("w", names, links);
        for (int step = 0; step < 5; ++step) {
            const auto a = names[rng.below(n)], b = names[rng.below(n)];
            if (a == b) continue;
            const Verdict v = rng.bernoulli(0.7) ? Verdict::confirmed : Verdict::refuted;
            cur = apply_contradiction(cur, evidence(a, b, v, Orientation::source_to_target));
            CHECK(graph::is_acyclic(cur.mechanism));
        }
    }
}

TEST_CASE("file provider") {
    const auto dir = std::filesystem::temp_directory_path() / "causeway_provider_test";
    std::filesystem::create_directories(dir);
    const auto a = build("a", {"A", "B"}, {{"A", "B", 0.3}}), b = build("b", {"A", "B"}, {{"A", "B", 0.7}});
    {
        std::ofstream(dir / "one.json") << to_json(a).dump();
        std::ofstream(dir / "two.json") << nlohmann::json{{"worldviews", {to_json(b)}}}.dump();
        std::ofstream(dir / "bad.json") << "{\"id\": ";
    }
    FileProvider p({(dir / "one.json").string(), (dir / "two.json").string()});
    const auto all = p.parse("why", {});
    REQUIRE(all.size() == 2);
    CHECK(p.integrate(all).id == "b");
    FileProvider broken({(dir / "bad.json").string()});
    CHECK_THROWS_AS(broken.parse("", {}), ValidationError);
    CHECK_THROWS_AS(FileProvider({}), ValidationError);
}

TEST_CASE("provider selection") {
    unsetenv("CAUSEWAY_PROVIDER_URL");
    CHECK_THROWS_WITH_AS(make_provider({}), doctest::Contains("provider"), ValidationError);
    setenv("CAUSEWAY_PROVIDER_URL", "http://127.0.0.1:1/x", 1);
    CHECK(make_provider({})->name() == "remote");
    CHECK(make_provider({"w.json"})->name() == "file");
    unsetenv("CAUSEWAY_PROVIDER_URL");
    CHECK_THROWS_AS(RemoteProvider({"https://example.org", "", 1.0, ""}), ValidationError);
}

TEST_CASE("remote provider over http") {
    const auto wv = build("remote-1", {"A", "B"}, {{"A", "B", 0.6}});
    httplib::Server server;
    std::string seen_auth, seen_task;
    server.Post("/hyp", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        const auto body = nlohmann::json::parse(req.body);
        seen_task = body["task"];
        nlohmann::json out;
        if (seen_task == "parse") out = {{"worldviews", {to_json(wv)}}};
        else if (seen_task == "integrate") out = {{"worldview", body["payload"]["worldviews"][0]}};
        else out = {{"worldview", {{"id", "broken"}}}};
        res.set_content(out.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteProvider p({"http://127.0.0.1:" + std::to_string(port) + "/hyp", "secret", 5.0, ""});
    const auto parsed = p.parse("q", {"text"});
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == wv);
    CHECK(seen_auth == "Bearer secret");
    CHECK(p.integrate(parsed) == wv);
    CHECK_THROWS_AS(p.revise(wv, evidence("A", "B", Verdict::refuted, Orientation::undetermined)), ValidationError);
    server.stop();
    t.join();

    RemoteProvider dead({"http://127.0.0.1:" + std::to_string(port) + "/hyp", "", 0.5, ""});
    CHECK_THROWS_AS(dead.parse("q", {}), ProviderError);
}
