#include "devminer/error.hpp"
#include "devminer/random.hpp"
#include "devminer/stats.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

using namespace devminer;
using namespace devminer::stats;

namespace {

std::vector<double> draw(Rng& rng, std::size_t n, int levels) {
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(rng.between(0, levels - 1));
    return v;
}

struct Groups {
    std::vector<double> metric, size, age;
    std::unique_ptr<bool[]> labels;
    std::size_t n = 0;
    std::span<const bool> defective() const { return {labels.get(), n}; }
};

}  // namespace

TEST_CASE("Mann-Whitney worked cases") {
    const std::vector<double> x{4, 5, 6}, y{1, 2, 3};
    const auto r = mann_whitney_one_sided(x, y, Direction::defective_greater);
    CHECK(r.exact);
    CHECK(r.u_statistic == 9.0);
    CHECK(r.p_value == doctest::Approx(1.0 / 20.0));
    CHECK(mann_whitney_one_sided(x, y, Direction::neutral_greater).p_value == doctest::Approx(1.0));

    const std::vector<double> same{1, 2, 2, 3, 5};
    CHECK(mann_whitney_one_sided(same, same, Direction::defective_greater).p_value >= 0.4);

    const std::vector<double> tied(12, 3.0);
    CHECK(mann_whitney_one_sided(tied, tied, Direction::defective_greater).p_value == 1.0);
    CHECK_THROWS_AS(mann_whitney_one_sided({}, y, Direction::defective_greater), ArgumentError);
}

TEST_CASE("midranks average tied positions") {
    const std::vector<double> v{10, 20, 20, 5, 20};
    CHECK(midranks(v) == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("exact path equals full permutation enumeration") {
    Rng rng(31);
    for (std::size_t n1 = 1; n1 <= 6; ++n1)
        for (std::size_t n2 = 1; n2 <= 6; ++n2) {
            const auto x = draw(rng, n1, 5);
            const auto y = draw(rng, n2, 5);
            const auto r = mann_whitney_one_sided(x, y, Direction::defective_greater);
            CHECK(r.exact);
            CHECK(r.p_value == doctest::Approx(oracle::permutation_p_exact(x, y)).epsilon(1e-12));
            const auto back = mann_whitney_one_sided(x, y, Direction::neutral_greater);
            CHECK(back.p_value == doctest::Approx(oracle::permutation_p_exact(y, x)).epsilon(1e-12));
        }
}

TEST_CASE("normal approximation tracks sampled permutations") {
    Rng rng(37);
    for (int f = 0; f < 3; ++f) {
        std::vector<double> x(15), y(15);
        for (auto& v : x) v = rng.normal(0.4, 1.0);
        for (auto& v : y) v = std::round(rng.normal(0.0, 1.0) * 2) / 2;
        const auto r = mann_whitney_one_sided(x, y, Direction::defective_greater);
        CHECK_FALSE(r.exact);
        CHECK(std::abs(r.p_value - oracle::permutation_p_sampled(x, y, 20000, 100 + f)) < 0.015);
    }
}

TEST_CASE("monotone transforms do not move the p-value") {
    Rng rng(41);
    for (int t = 0; t < 20; ++t) {
        auto x = draw(rng, 11, 30);
        auto y = draw(rng, 9, 30);
        const double p = mann_whitney_one_sided(x, y, Direction::defective_greater).p_value;
        for (auto& v : x) v = std::exp(v / 3.0);
        for (auto& v : y) v = std::exp(v / 3.0);
        CHECK(mann_whitney_one_sided(x, y, Direction::defective_greater).p_value == doctest::Approx(p));
    }
}

TEST_CASE("Cliff's delta") {
    const std::vector<double> hi{5, 6, 7}, lo{1, 2};
    CHECK(cliffs_delta_value(hi, lo) == 1.0);
    CHECK(cliffs_delta(hi, lo).magnitude == Magnitude::large);
    CHECK(cliffs_delta_value(hi, hi) == 0.0);
    CHECK(cliffs_delta(hi, hi).magnitude == Magnitude::negligible);

    // ten values against 0..9, shaped to land on 0.55
    const std::vector<double> x{9.5, 9.5, 9.5, 9.5, 8.5, 8.5, 8.5, 4.5, 4.5, 0};
    const std::vector<double> y{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    CHECK(oracle::cliffs_delta(x, y) == doctest::Approx(0.55));
    CHECK(cliffs_delta_value(x, y) == doctest::Approx(0.55));
    CHECK(cliffs_delta(x, y).magnitude == Magnitude::large);

    Rng rng(43);
    for (int t = 0; t < 100; ++t) {
        const auto a = draw(rng, static_cast<std::size_t>(rng.between(1, 20)), 8);
        const auto b = draw(rng, static_cast<std::size_t>(rng.between(1, 20)), 8);
        const double d = cliffs_delta_value(a, b);
        CHECK(d == doctest::Approx(oracle::cliffs_delta(a, b)).epsilon(1e-15));
        CHECK(cliffs_delta_value(b, a) == doctest::Approx(-d));
        CHECK(std::abs(d) <= 1.0);
    }
    CHECK_THROWS_AS(cliffs_delta_value({}, hi), ArgumentError);
}

TEST_CASE("Romano magnitude bins") {
    CHECK(romano_magnitude(0.10) == Magnitude::negligible);
    CHECK(romano_magnitude(0.20) == Magnitude::small);
    CHECK(romano_magnitude(0.40) == Magnitude::medium);
    CHECK(romano_magnitude(0.50) == Magnitude::large);
    CHECK(romano_magnitude(-0.50) == Magnitude::large);
    CHECK(romano_magnitude(0.14) == Magnitude::small);
    CHECK(romano_magnitude(0.33) == Magnitude::medium);
    CHECK(romano_magnitude(0.47) == Magnitude::large);
    CHECK(to_string(Magnitude::medium) == "medium");
}

TEST_CASE("log1p transform") {
    const std::vector<double> v{0.0, std::numbers::e - 1.0, 3.0};
    const auto t = log1p_transform(v);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == doctest::Approx(1.0));
    CHECK(t[2] == doctest::Approx(std::log(4.0)));
    const std::vector<double> neg{-1.0};
    CHECK_THROWS_AS(log1p_transform(neg), ArgumentError);

    Eigen::MatrixXd m(1, 2);
    m << 0.0, std::numbers::e - 1.0;
    log1p_inplace(m);
    CHECK(m(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("skewness") {
    const std::vector<double> sym{1, 2, 3, 4, 5};
    CHECK(skewness(sym) == doctest::Approx(0.0));
    const std::vector<double> right{0, 0, 0, 0, 10};
    // population moments: mean 2, m2 = 16, m3 = 96
    CHECK(skewness(right) == doctest::Approx(96.0 / std::pow(16.0, 1.5)));
}

namespace {

Groups make_groups(Rng& rng, std::size_t n) {
    Groups g;
    g.n = n;
    g.labels = std::make_unique<bool[]>(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.labels[i] = i % 3 == 0;
        g.metric.push_back(rng.normal(5.0, 1.0));
        g.size.push_back(rng.normal(50.0, 5.0));
        g.age.push_back(rng.normal(12.0, 2.0));
    }
    return g;
}

}  // namespace

TEST_CASE("OMANOVA per-response F equals the sums-of-squares oracle") {
    Rng rng(47);
    auto g = make_groups(rng, 60);
    for (std::size_t i = 0; i < g.n; ++i) g.size[i] += g.labels[i] ? 10.0 : 0.0;
    const auto r = omanova(g.metric, g.size, g.age, g.defective(), "m");
    const std::vector<bool> lab(g.labels.get(), g.labels.get() + g.n);
    CHECK_FALSE(r.size.transformed);
    CHECK(r.size.f_statistic == doctest::Approx(oracle::one_way_f(g.size, lab)));
    CHECK(r.metric.f_statistic == doctest::Approx(oracle::one_way_f(g.metric, lab)));
    CHECK(r.size.p_value < 1e-4);
    CHECK(r.metric.p_value > 0.01);
    CHECK(r.metric.name == "m");
    CHECK(r.pillai_trace >= 0.0);
    CHECK(r.pillai_trace <= 1.0);

    // swapping which group is defective changes nothing
    for (std::size_t i = 0; i < g.n; ++i) g.labels[i] = !g.labels[i];
    const auto flipped = omanova(g.metric, g.size, g.age, g.defective(), "m");
    CHECK(flipped.metric.p_value == doctest::Approx(r.metric.p_value));
    CHECK(flipped.size.p_value == doctest::Approx(r.size.p_value));
    CHECK(flipped.pillai_p == doctest::Approx(r.pillai_p));
}

TEST_CASE("OMANOVA transforms skewed responses and rejects constants") {
    Rng rng(53);
    auto g = make_groups(rng, 40);
    for (auto& v : g.age) v = std::exp(rng.normal(0.0, 1.5));
    const auto r = omanova(g.metric, g.size, g.age, g.defective());
    CHECK(r.age.transformed);

    std::fill(g.metric.begin(), g.metric.end(), 2.0);
    try {
        omanova(g.metric, g.size, g.age, g.defective(), "scatteredness");
        FAIL("expected a degenerate-variance error");
    } catch (const DegenerateError& e) {
        CHECK(std::string(e.what()).find("scatteredness") != std::string::npos);
    }
}

TEST_CASE("OMANOVA calibration") {
    Rng rng(59);
    int calm = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto g = make_groups(rng, 60);
        Rng shuffle(derive_seed(59, static_cast<std::uint64_t>(trial)));
        std::span<bool> labels(g.labels.get(), g.n);
        shuffle.shuffle(labels);
        if (omanova(g.metric, g.size, g.age, g.defective()).metric.p_value > 0.01) ++calm;
    }
    CHECK(calm >= 95);

    auto g = make_groups(rng, 60);
    for (std::size_t i = 0; i < g.n; ++i) g.metric[i] = (g.labels[i] ? 1.0 : 0.0) + rng.normal(0.0, 0.01);
    CHECK(omanova(g.metric, g.size, g.age, g.defective()).metric.p_value < 1e-6);
}
