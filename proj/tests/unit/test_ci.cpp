#include <doctest.h>

#include <cmath>
#include <set>

#include "causeway/ci/ci_test.hpp"
#include "causeway/common.hpp"
#include "causeway/random.hpp"

using namespace causeway;
using namespace causeway::ci;
using data::Dataset;
using data::ValueKind;

namespace {

Dataset ordinal(const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
    Dataset ds;
    for (const auto& [name, values] : cols) ds.add_column({name, ValueKind::ordinal, data::Provenance::logged, values});
    return ds;
}

std::vector<double> coins(Stream& rng, std::size_t n, int levels = 2) {
    std::vector<double> out(n);
    for (auto& v : out) v = static_cast<double>(rng.below(levels));
    return out;
}

}  // namespace

TEST_CASE("chi-square detects a copy") {
    Stream rng(1);
    auto x = coins(rng, 1000);
    auto r = chi_square_ci(ordinal({{"x", x}, {"y", x}}), "x", "y", {});
    CHECK(r.p_value < 1e-6);
    CHECK_FALSE(r.independent);
    CHECK(r.dof == 1);
}

TEST_CASE("chi-square calibration on independent coins") {
    // 2000 seeds rather than 200: at 200 a calibrated test misses the 94%
    // floor about a quarter of the time.
    int independent = 0;
    for (int seed = 0; seed < 2000; ++seed) {
        Stream rng(derive_seed(99, seed));
        auto ds = ordinal({{"x", coins(rng, 5000)}, {"y", coins(rng, 5000)}});
        independent += chi_square_ci(ds, "x", "y", {}, 0.05).independent ? 1 : 0;
    }
    CHECK(independent >= 1880);
}

TEST_CASE("chi-square collider fixture") {
    // z = x XOR y: x and y are marginally independent but dependent given z.
    Stream rng(3);
    auto x = coins(rng, 2000), y = coins(rng, 2000);
    std::vector<double> z(2000);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] != y[i] ? 1.0 : 0.0;
    auto ds = ordinal({{"x", x}, {"y", y}, {"z", z}});
    CHECK(chi_square_ci(ds, "x", "y", {}).p_value > 1e-3);
    CHECK(chi_square_ci(ds, "x", "y", {"z"}).p_value < 1e-6);
}

TEST_CASE("chi-square dof matches stratum counting") {
    Stream rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 20 + rng.below(40);
        auto x = coins(rng, n, 3), y = coins(rng, n, 4), z = coins(rng, n, 3);
        auto ds = ordinal({{"x", x}, {"y", y}, {"z", z}});
        int expected = 0;
        for (int s = 0; s < 3; ++s) {
            std::set<double> xs, ys;
            for (std::size_t i = 0; i < n; ++i)
                if (z[i] == s) {
                    xs.insert(x[i]);
                    ys.insert(y[i]);
                }
            if (xs.size() >= 2 && ys.size() >= 2) expected += static_cast<int>((xs.size() - 1) * (ys.size() - 1));
        }
        const auto r = chi_square_ci(ds, "x", "y", {"z"});
        CHECK(r.dof == expected);
        const auto swapped = chi_square_ci(ds, "y", "x", {"z"});
        CHECK(std::abs(r.statistic - swapped.statistic) < 1e-12);
        CHECK(std::abs(r.p_value - swapped.p_value) < 1e-12);
    }
}

TEST_CASE("chi-square with no informative stratum") {
    log::Capture capture;
    auto ds = ordinal({{"x", {0, 0, 0}}, {"y", {0, 1, 0}}});
    const auto r = chi_square_ci(ds, "x", "y", {});
    CHECK(r.independent);
    CHECK(r.dof == 0);
    CHECK(r.p_value == 1.0);
    CHECK(capture.contains("insufficient"));
    CHECK_THROWS_AS(chi_square_ci(data::make_dataset({{"x", {0.5}}, {"y", {1}}}), "x", "y", {}), ValidationError);
}

TEST_CASE("fisher-z closed form") {
    auto zero = fisher_z_from_r(0.0, 100, 0, 0.05);
    CHECK(zero.statistic == 0.0);
    CHECK(zero.p_value == 1.0);
    auto half = fisher_z_from_r(0.5, 100, 0, 0.05);
    CHECK(half.statistic == doctest::Approx(0.5 * std::log(3.0) * std::sqrt(97.0)).epsilon(1e-12));
    CHECK(half.statistic == doctest::Approx(5.41).epsilon(1e-3));
    CHECK(half.p_value < 1e-6);
    CHECK(std::isfinite(fisher_z_from_r(1.0, 100, 0, 0.05).statistic));
}

TEST_CASE("fisher-z on sampled data") {
    Stream rng(8);
    std::vector<double> x(50), y(50), w(50);
    for (std::size_t i = 0; i < 50; ++i) {
        x[i] = rng.normal();
        y[i] = 2 * x[i] + 0.1 * rng.normal();
        w[i] = rng.normal();
    }
    auto ds = data::make_dataset({{"x", x}, {"y", y}, {"w", w}});
    CHECK_FALSE(fisher_z_ci(ds, "x", "y", {}).independent);
    auto a = fisher_z_ci(ds, "x", "w", {"y"});
    auto b = fisher_z_ci(ds, "w", "x", {"y"});
    CHECK(std::abs(a.p_value - b.p_value) < 1e-12);
}

TEST_CASE("fisher-z singular conditioning") {
    Stream rng(9);
    std::vector<double> x(100), y(100), z(100);
    for (std::size_t i = 0; i < 100; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
        z[i] = rng.normal();
    }
    auto ds = data::make_dataset({{"x", x}, {"y", y}, {"z", z}, {"z2", z}});
    CHECK_THROWS_AS(fisher_z_ci(ds, "x", "y", {"z", "z2"}), NumericalError);
    // The cached tester drops the redundant conditioner instead.
    IndependenceTest tester(ds, {"x", "y", "z", "z2"});
    CHECK(tester.regime() == Regime::continuous);
    const auto r = tester.test("x", "y", {"z", "z2"}, 0.05);
    CHECK(r.p_value == doctest::Approx(fisher_z_ci(ds, "x", "y", {"z"}).p_value).epsilon(1e-9));
}

TEST_CASE("strong dependence survives extension") {
    Stream rng(10);
    auto draw = [&](std::size_t n, std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = rng.normal();
            x.push_back(v);
            y.push_back(0.6 * v + rng.normal());
        }
    };
    std::vector<double> x, y;
    draw(300, x, y);
    REQUIRE(fisher_z_ci(data::make_dataset({{"x", x}, {"y", y}}), "x", "y", {}).p_value < 1e-6);
    int kept = 0;
    for (int b = 0; b < 100; ++b) {
        auto xe = x, ye = y;
        draw(300, xe, ye);
        kept += fisher_z_ci(data::make_dataset({{"x", xe}, {"y", ye}}), "x", "y", {}).independent ? 0 : 1;
    }
    CHECK(kept >= 99);
}

TEST_CASE("regime selection") {
    Stream rng(12);
    std::vector<double> c(200);
    for (auto& v : c) v = rng.normal();
    Dataset ds = data::make_dataset({{"c", c}});
    ds.add_column({"o", ValueKind::ordinal, data::Provenance::logged, coins(rng, 200)});
    IndependenceTest mixed(ds, {"c", "o"});
    CHECK(mixed.regime() == Regime::discrete);
    CHECK(mixed.test("c", "o", {}, 0.05).method == "chi_square");
    IndependenceTest cont(ds, {"c"});
    CHECK(cont.regime() == Regime::continuous);
}
