#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "causeway/common.hpp"
#include "causeway/random.hpp"
#include "causeway/refine/refine.hpp"
#include "causeway/sim/scm.hpp"

using namespace causeway;
using namespace causeway::refine;
using data::Dataset;
using data::ValueKind;

namespace {

std::vector<double> coins(Stream& rng, std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = static_cast<double>(rng.below(2));
    return out;
}

std::vector<double> normals(Stream& rng, std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = rng.normal();
    return out;
}

void add_ordinal(Dataset& ds, std::string name, std::vector<double> values) {
    ds.add_column({std::move(name), ValueKind::ordinal, data::Provenance::logged, std::move(values)});
}

sim::ScmNode node(std::string name, std::map<std::string, double> parents = {}, double noise = 1.0) {
    sim::ScmNode n;
    n.name = std::move(name);
    n.parents = std::move(parents);
    n.noise = noise;
    return n;
}

}  // namespace

TEST_CASE("holdout split") {
    const auto s = holdout_split(100, 0.25, 3);
    CHECK(s.holdout.size() == 25);
    CHECK(s.train.size() == 75);
    std::set<std::size_t> all(s.holdout.begin(), s.holdout.end());
    all.insert(s.train.begin(), s.train.end());
    CHECK(all.size() == 100);
    CHECK(holdout_split(100, 0.25, 3).holdout == s.holdout);
    CHECK_THROWS_AS(holdout_split(9, 0.25, 3), ValidationError);
    CHECK_THROWS_AS(holdout_split(100, 1.0, 3), ValidationError);
}

TEST_CASE("predictive uncertainty of a fair coin") {
    Stream rng(1);
    Dataset ds;
    const auto y = coins(rng, 5000);
    add_ordinal(ds, "y", y);
    add_ordinal(ds, "copy", y);
    ds.add_column({"noise", ValueKind::continuous, data::Provenance::logged, normals(rng, 5000)});

    const double base = predictive_uncertainty(ds, "y", {});
    CHECK(std::abs(base - std::log(2.0)) < 0.05);
    CHECK(predictive_uncertainty(ds, "y", {"copy"}) < 0.05);
    CHECK(std::abs(predictive_uncertainty(ds, "y", {"noise"}) - base) < 0.02);
    CHECK(predictive_uncertainty(ds, "y", {}, 0.25, 7) == predictive_uncertainty(ds, "y", {}, 0.25, 7));
    CHECK_THROWS_AS(predictive_uncertainty(ds, "y", {"missing"}), ValidationError);
}

TEST_CASE("ridge loss matches the noise variance") {
    Stream rng(2);
    const auto x = normals(rng, 4000);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2.0 * x[i] + 0.5 * rng.normal();
    const auto ds = data::make_dataset({{"x", x}, {"y", y}});
    CHECK(predictive_uncertainty(ds, "y", {"x"}) == doctest::Approx(0.25).epsilon(0.1));
    CHECK(predictive_uncertainty(ds, "y", {}) == doctest::Approx(4.25).epsilon(0.1));
}

TEST_CASE("multiclass target") {
    Stream rng(3);
    std::vector<double> x(3000), y(3000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = static_cast<double>(rng.below(3));
        x[i] = y[i] + 0.3 * rng.normal();
    }
    Dataset ds = data::make_dataset({{"x", x}});
    add_ordinal(ds, "y", y);
    const double base = predictive_uncertainty(ds, "y", {});
    CHECK(std::abs(base - std::log(3.0)) < 0.05);
    CHECK(predictive_uncertainty(ds, "y", {"x"}) < 0.4);
}

TEST_CASE("information gain") {
    Stream rng(4);
    Dataset ds;
    const auto y = coins(rng, 5000);
    add_ordinal(ds, "y", y);
    add_ordinal(ds, "copy", y);
    add_ordinal(ds, "copy2", y);
    add_ordinal(ds, "other", coins(rng, 5000));

    const auto copy = information_gain(ds, "y", {}, "copy");
    CHECK(copy.admitted);
    CHECK(copy.after < 0.05);
    CHECK(copy.gain == doctest::Approx(copy.before - copy.after));
    CHECK(copy.before >= std::log(2.0) - 0.05);

    RefineOptions strict;
    strict.tau = 0.02;
    const auto indep = information_gain(ds, "y", {}, "other", strict);
    CHECK(std::abs(indep.gain) < 0.02);
    CHECK_FALSE(indep.admitted);
    CHECK(indep.threshold == 0.02);

    CHECK(std::abs(information_gain(ds, "y", {"copy"}, "copy2").gain) < 0.02);
    CHECK_THROWS_AS(information_gain(ds, "y", {"copy"}, "copy"), ValidationError);
}

TEST_CASE("worst group") {
    Stream rng(5);
    const std::size_t n = 2000;
    const auto x = normals(rng, n);
    std::vector<double> y(n);
    std::set<std::size_t> hard;
    for (std::size_t i = 0; i < n; ++i) {
        // Two regimes: small bounded noise, or a jump of at least 3.
        if (i % 4 == 0) {
            hard.insert(i);
            y[i] = x[i] + (rng.bernoulli(0.5) ? 1.0 : -1.0) * (3.0 + rng.uniform());
        } else {
            y[i] = x[i] + rng.uniform(-0.1, 0.1);
        }
    }
    const auto ds = data::make_dataset({{"x", x}, {"y", y}});
    const RefineOptions options;
    const auto split = holdout_split(n, options.holdout_frac, options.seed);
    std::vector<std::size_t> hard_holdout;
    for (auto i : split.holdout)
        if (hard.contains(i)) hard_holdout.push_back(i);
    const double fraction = static_cast<double>(hard_holdout.size()) / static_cast<double>(split.holdout.size());
    CHECK(worst_group(ds, "y", {"x"}, fraction) == hard_holdout);
    CHECK(worst_group(ds, "y", {"x"}, 1.0) == split.holdout);
    CHECK_THROWS_AS(worst_group(ds, "y", {"x"}, 0.0), ValidationError);

    // Equal losses everywhere: ties break by row index.
    auto flat = data::make_dataset({{"y", std::vector<double>(40, 1.0)}});
    const auto s = holdout_split(40, 0.25, 0);
    const auto w = worst_group(flat, "y", {}, 0.5);
    CHECK(w == std::vector<std::size_t>(s.holdout.begin(), s.holdout.begin() + 5));
}

TEST_CASE("prune redundant") {
    sim::ScmModel m("prune", {node("X"), node("Y", {{"X", 1.0}}), node("N")}, "Y");
    auto ds = sim::scm_sample(m, 5000, 6);
    CHECK(prune_redundant(ds, "Y", {"N", "X"}) == std::vector<std::string>{"X"});
    CHECK(prune_redundant(ds, "Y", {}).empty());

    const auto x = ds.values("X");
    ds.add_column({"copy1", ValueKind::continuous, data::Provenance::logged, {x.begin(), x.end()}});
    ds.add_column({"copy2", ValueKind::continuous, data::Provenance::logged, {x.begin(), x.end()}});
    CHECK(prune_redundant(ds, "Y", {"copy1", "copy2"}) == std::vector<std::string>{"copy2"});

    // Pruning leaves the predictive loss essentially unchanged.
    const double before = predictive_uncertainty(ds, "Y", {"N", "X"});
    CHECK(predictive_uncertainty(ds, "Y", prune_redundant(ds, "Y", {"N", "X"})) <= before + 0.05);
    CHECK_THROWS_AS(prune_redundant(ds, "Y", {"Y"}), ValidationError);
}

TEST_CASE("estimate p and C") {
    auto [p1, c1] = estimate_pc({10, 5, 5, 2.5}, 0.1);
    CHECK(p1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(c1 == 0.5);
    auto [p2, c2] = estimate_pc({3, 3, 3}, 0.1);
    CHECK(p2 == 0.0);
    CHECK(c2 == 0.0);
    auto [p3, c3] = estimate_pc({8, 4, 2, 1}, 0.01);
    CHECK(p3 == 1.0);
    CHECK(c3 == 0.5);
    CHECK_THROWS_AS(estimate_pc({1}, 0.1), ValidationError);
    CHECK_THROWS_AS(estimate_pc({1, 2}, 0.0), ValidationError);
}

TEST_CASE("flat tails leave C unchanged") {
    Stream rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> f{10.0};
        const int len = 2 + static_cast<int>(rng.below(6));
        for (int i = 0; i < len; ++i) f.push_back(f.back() * rng.uniform(0.3, 1.1));
        const auto base = estimate_pc(f, 0.05);
        auto longer = f;
        for (int i = 0; i < 3; ++i) longer.push_back(longer.back());
        CHECK(estimate_pc(longer, 0.05).second == base.second);
        CHECK(estimate_pc(longer, 0.05).first <= base.first);
    }
}

TEST_CASE("refine round without candidates") {
    sim::ScmModel m("chain", {node("X"), node("Y", {{"X", 1.0}})}, "Y");
    auto ds = sim::scm_sample(m, 2000, 8);
    const auto s0 = initial_state(ds, "Y", {"X"});
    const auto s1 = refine_round(s0, {}, ds, "Y");
    CHECK(s1.round == 1);
    CHECK(s1.active == s0.active);
    CHECK(s1.boundary == s0.boundary);
    CHECK(s1.f_trajectory.size() == 2);
    CHECK(s1.f_trajectory[1] == s0.f_trajectory[0]);
    CHECK(s1.admitted_per_round == std::vector<int>{0});
}

TEST_CASE("admitting a mediator lowers the residual difficulty") {
    sim::ScmModel m("mediator", {node("X"), node("M", {{"X", 1.0}}), node("Y", {{"M", 1.5}}, 0.5)}, "Y");
    auto ds = sim::scm_sample(m, 5000, 9);
    const auto s0 = initial_state(ds, "Y", {"X"});
    const auto s1 = refine_round(s0, {{"M", std::nullopt}}, ds, "Y");
    CHECK(s1.admitted_per_round.back() == 1);
    CHECK(s1.f_trajectory[1] < s1.f_trajectory[0]);
    CHECK(s1.boundary == std::vector<std::string>{"M"});
    const auto rec = round_record(s1);
    CHECK(rec["round"] == 1);
    CHECK(rec["gains"].size() == 1);
}

TEST_CASE("factor candidates are materialized") {
    Stream rng(10);
    const auto a = normals(rng, 3000), b = normals(rng, 3000);
    std::vector<double> y(a.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] - b[i] + 0.2 * rng.normal();
    auto ds = data::make_dataset({{"a", a}, {"b", b}, {"y", y}});
    data::FactorSpec diff;
    diff.name = "a_minus_b";
    diff.kind = data::FactorTemplate::difference;
    diff.inputs = {"a", "b"};
    const auto s1 = refine_round(initial_state(ds, "y", {}), {{"a_minus_b", diff}}, ds, "y");
    CHECK(ds.has("a_minus_b"));
    CHECK(s1.boundary == std::vector<std::string>{"a_minus_b"});
}

TEST_CASE("boundary growth is bounded by admissions") {
    int rounds = 0;
    for (int seed = 0; seed < 25; ++seed) {
        const auto model = sim::random_linear_scm(6, 0.4, seed);
        auto ds = sim::scm_sample(model, 1000, seed);
        const auto target = model.target();
        std::vector<Candidate> pool;
        for (const auto& name : model.names())
            if (name != target) pool.push_back({name, std::nullopt});
        auto state = initial_state(ds, target, {});
        for (int r = 0; r < 4; ++r) {
            // Offer a rotating subset so rounds differ.
            std::vector<Candidate> offer;
            for (std::size_t i = 0; i < pool.size(); ++i)
                if ((i + r) % 2 == 0) offer.push_back(pool[i]);
            auto next = refine_round(state, offer, ds, target);
            CHECK(next.boundary.size() <= state.boundary.size() + next.admitted_per_round.back());
            CHECK(std::includes(next.active.begin(), next.active.end(), next.boundary.begin(), next.boundary.end()));
            CHECK(next.f_trajectory.size() == static_cast<std::size_t>(next.round) + 1);
            state = std::move(next);
            ++rounds;
        }
    }
    CHECK(rounds == 100);
}

TEST_CASE("refinement converges to the markov boundary") {
    // A -> P -> Y -> C <- S, C -> D, plus an unrelated N. Boundary {C, P, S}.
    sim::ScmModel m("boundary",
                    {node("A"), node("P", {{"A", 1.0}}), node("Y", {{"P", 1.0}}), node("S"),
                     node("C", {{"Y", 1.0}, {"S", 1.0}}), node("D", {{"C", 1.0}}), node("N")},
                    "Y");
    RefineOptions options;
    options.alpha = 0.01;
    int hits = 0;
    for (int seed = 0; seed < 50; ++seed) {
        auto ds = sim::scm_sample(m, 10000, seed);
        std::vector<Candidate> pool;
        for (const auto& name : m.names())
            if (name != "Y") pool.push_back({name, std::nullopt});
        auto state = initial_state(ds, "Y", {}, options);
        for (int r = 0; r < 6; ++r) {
            auto next = refine_round(state, pool, ds, "Y", options);
            const bool stable = next.active == state.active;
            state = std::move(next);
            if (stable) break;
        }
        hits += state.boundary == std::vector<std::string>{"C", "P", "S"} ? 1 : 0;
    }
    CHECK(hits >= 45);
}
