#include <doctest.h>

#include <cmath>

#include "causeway/common.hpp"
#include "causeway/data/dataset.hpp"
#include "causeway/data/factor.hpp"
#include "causeway/random.hpp"

using namespace causeway;
using namespace causeway::data;

namespace {

FactorSpec spec(std::string name, FactorTemplate kind, std::vector<std::string> inputs, int window = 1) {
    FactorSpec s;
    s.name = std::move(name);
    s.kind = kind;
    s.inputs = std::move(inputs);
    s.window = window;
    return s;
}

}  // namespace

TEST_CASE("discretize quantile blocks") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    auto ds = discretize(make_dataset({{"x", v}}), "x", 5);
    CHECK(ds.column("x").kind == ValueKind::ordinal);
    for (int i = 1; i <= 100; ++i) CHECK(ds.values("x")[i - 1] == (i - 1) / 20);
    CHECK_THROWS_AS(discretize(ds, "x", 5), ValidationError);
    CHECK_THROWS_AS(discretize(make_dataset({{"x", v}}), "x", 1), ValidationError);
}

TEST_CASE("discretize degenerate columns") {
    log::Capture capture;
    auto ds = discretize(make_dataset({{"c", std::vector<double>(10, 3.0)}}), "c", 5);
    for (double c : ds.values("c")) CHECK(c == 0.0);
    CHECK(capture.contains("constant"));

    // Edges 0, 0, 1, 1.4, 2, 2 collapse to 0, 1, 1.4, 2: three codes.
    auto few = discretize(make_dataset({{"b", {0, 0, 0, 1, 1, 1, 2, 2, 2, 2}}}), "b", 5);
    const auto codes = few.values("b");
    CHECK(codes[0] == 0.0);
    CHECK(codes[3] == 1.0);
    CHECK(codes[9] == 2.0);
}

TEST_CASE("discretize is monotone") {
    Stream rng(21);
    std::vector<double> v(500);
    for (auto& x : v) x = rng.normal() * rng.exponential(1.0);
    auto ds = discretize(make_dataset({{"x", v}}), "x", 5);
    const auto codes = ds.values("x");
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[i] <= v[j]) CHECK(codes[i] <= codes[j]);
    for (double c : codes) CHECK((c >= 0 && c <= 4));
}

TEST_CASE("quantile matches sorted interpolation") {
    CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({5, 1, 3}, 0.0) == 1.0);
    CHECK(quantile({5, 1, 3}, 1.0) == 5.0);
    CHECK(quantile({0, 10}, 0.25) == doctest::Approx(2.5));
}

TEST_CASE("factor templates") {
    auto ds = make_dataset({{"a", {2, 1}}, {"b", {4, 0}}});
    auto r = materialize_factor(ds, spec("r", FactorTemplate::ratio, {"a", "b"}));
    CHECK(r.values("r")[0] == 0.5);
    CHECK(r.values("r")[1] == 0.0);
    CHECK(r.guarded_rows().at("r") == 1);
    CHECK(r.column("r").provenance == Provenance::constructed);

    auto d = materialize_factor(ds, spec("d", FactorTemplate::difference, {"a", "b"}));
    CHECK(d.values("d")[0] == -2.0);

    auto seq = make_dataset({{"x", {1, 3, 5}}});
    auto rm = materialize_factor(seq, spec("m", FactorTemplate::rolling_mean, {"x"}, 2));
    CHECK(rm.values("m")[0] == 1.0);
    CHECK(rm.values("m")[1] == 2.0);
    CHECK(rm.values("m")[2] == 4.0);
    auto rv = materialize_factor(seq, spec("v", FactorTemplate::rolling_var, {"x"}, 2));
    CHECK(rv.values("v")[0] == 0.0);
    CHECK(rv.values("v")[2] == 1.0);

    auto late = make_dataset({{"late", {3}}, {"total", {10}}});
    auto sh = materialize_factor(late, spec("share_late", FactorTemplate::share, {"late", "total"}));
    CHECK(sh.values("share_late")[0] == doctest::Approx(0.3));

    auto cnt = spec("n", FactorTemplate::count, {"a", "b"});
    cnt.params["threshold"] = 1.5;
    CHECK(materialize_factor(ds, cnt).values("n")[0] == 2.0);
    CHECK(materialize_factor(ds, cnt).values("n")[1] == 0.0);

    auto deg = make_dataset({{"deg_u", {1, 4}}, {"deg_v", {3, 0}}});
    auto gm = spec("g", FactorTemplate::graph_metric, {"deg_u", "deg_v"});
    CHECK(materialize_factor(deg, gm).values("g")[0] == 2.0);
    gm.options["metric"] = "degree_concentration";
    CHECK(materialize_factor(deg, gm).values("g")[1] == 1.0);
}

TEST_CASE("rolling windows stay inside sequences") {
    auto ds = make_dataset({{"x", {1, 3, 5, 7}}});
    ds.set_sequence_ids({0, 0, 1, 1});
    auto rm = materialize_factor(ds, spec("m", FactorTemplate::rolling_mean, {"x"}, 3));
    CHECK(rm.values("m")[2] == 5.0);
    CHECK(rm.values("m")[3] == 6.0);
    auto agg = aggregate_by_sequence(rm);
    CHECK(agg.rows() == 2);
    CHECK(agg.values("x")[0] == 2.0);
}

TEST_CASE("factor errors") {
    auto ds = make_dataset({{"a", {1}}});
    CHECK_THROWS_AS(materialize_factor(ds, spec("r", FactorTemplate::ratio, {"a", "zz"})), ValidationError);
    CHECK_THROWS_AS(materialize_factor(ds, spec("a", FactorTemplate::difference, {"a", "a"})), ValidationError);
    CHECK_THROWS_AS(validate(spec("w", FactorTemplate::rolling_mean, {"a"}, 0)), ValidationError);
    CHECK_THROWS_AS(validate(spec("e", FactorTemplate::ratio, {})), ValidationError);
}

TEST_CASE("materialization is deterministic") {
    Stream rng(4);
    std::vector<double> a(200), b(200);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    auto ds = make_dataset({{"a", a}, {"b", b}});
    const auto s = spec("r", FactorTemplate::ratio, {"a", "b"});
    const auto x = materialize_factor(ds, s).values("r");
    const auto y = materialize_factor(ds, s).values("r");
    CHECK(std::equal(x.begin(), x.end(), y.begin()));
}

TEST_CASE("supports bottom out in logged columns") {
    auto r = spec("r", FactorTemplate::ratio, {"a", "b"});
    CHECK(support_of(r) == std::set<std::string>{"a", "b"});
    auto g = spec("g", FactorTemplate::graph_metric, {"deg_u", "deg_v"});
    CHECK(support_of(g) == std::set<std::string>{"deg_u", "deg_v"});
    auto nested = spec("n", FactorTemplate::difference, {"r", "c"});
    const auto supports = build_supports({"a", "b", "c"}, {r, nested});
    CHECK(supports.at("a") == std::set<std::string>{"a"});
    CHECK(supports.at("n") == std::set<std::string>{"a", "b", "c"});
    auto loop1 = spec("p", FactorTemplate::difference, {"q", "a"});
    auto loop2 = spec("q", FactorTemplate::difference, {"p", "a"});
    CHECK_THROWS_AS(build_supports({"a"}, {loop1, loop2}), ValidationError);
}

TEST_CASE("factor json round trip") {
    auto s = spec("r", FactorTemplate::rolling_var, {"x"}, 4);
    s.params["threshold"] = 2.0;
    s.options["metric"] = "max_degree";
    s.aggregate = Aggregate::max;
    const auto back = factor_from_json(to_json(s));
    CHECK(back.name == s.name);
    CHECK(back.kind == s.kind);
    CHECK(back.window == 4);
    CHECK(back.params == s.params);
    CHECK(back.options == s.options);
    CHECK(back.aggregate == Aggregate::max);
}

TEST_CASE("csv round trip") {
    auto ds = make_dataset({{"a", {1.5, -2.25}}, {"b", {0.1, 1e-20}}});
    const auto back = parse_csv(to_csv(ds));
    CHECK(back.names() == ds.names());
    CHECK(back.values("b")[1] == 1e-20);
    CHECK(back.values("a")[0] == 1.5);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ValidationError);
    CHECK_THROWS_AS(make_dataset({{"a", {NAN}}}), ValidationError);
}
