#include "devminer/error.hpp"
#include "devminer/metrics.hpp"
#include "devminer/random.hpp"
#include "devminer/synthetic.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace devminer;
using namespace devminer::metrics;

namespace {

ScriptCommit sc(std::string id, std::string author, std::int64_t ts, std::int64_t add, std::int64_t del,
                std::vector<std::int64_t> lines) {
    return {std::move(id), std::move(author), ts, fixture::change("s.pp", add, del, std::move(lines))};
}

std::vector<std::int64_t> range(std::int64_t a, std::int64_t b) {
    std::vector<std::int64_t> v;
    for (std::int64_t i = a; i <= b; ++i) v.push_back(i);
    return v;
}

ScriptHistory hist(std::vector<ScriptCommit> commits) { return {"s.pp", std::move(commits)}; }

/// -sum x log2 x straight from per-line commit counts.
double entropy_oracle(const std::vector<int>& per_line, int commits) {
    double s = 0;
    for (int k : per_line) {
        const double x = static_cast<double>(k) / commits;
        if (x > 0) s -= x * std::log2(x);
    }
    return s;
}

}  // namespace

TEST_CASE("replay attribution") {
    auto attr = attribute_lines(hist({sc("1", "a", 1, 10, 0, range(1, 10))}));
    CHECK(attr.per_line_author == std::vector<std::string>(10, "a"));

    attr = attribute_lines(hist({sc("1", "a", 1, 10, 0, range(1, 10)), sc("2", "b", 2, 3, 3, range(1, 3))}));
    const auto own = ownership(attr);
    CHECK(own.at("a") == 7);
    CHECK(own.at("b") == 3);

    attr = attribute_lines(hist({sc("1", "a", 1, 10, 0, range(1, 10)), sc("2", "b", 2, 0, 2, {})}));
    CHECK(attr.per_line_author.size() == 8);
    CHECK(ownership(attr).count("b") == 0);

    // inserting in the middle shifts the old lines down
    attr = attribute_lines(hist({sc("1", "a", 1, 4, 0, range(1, 4)), sc("2", "b", 2, 1, 0, {3})}));
    CHECK(attr.per_line_author == std::vector<std::string>{"a", "a", "b", "a", "a"});

    CHECK_THROWS_AS(attribute_lines(hist({sc("1", "a", 1, 2, 0, {1, 5})})), ReplayError);
    CHECK_THROWS_AS(attribute_lines(hist({sc("1", "a", 1, 0, 3, {})})), ReplayError);
}

TEST_CASE("ownership metrics") {
    const auto single = attribute_lines(hist({sc("1", "a", 1, 5, 0, range(1, 5))}));
    CHECK(highest_contrib_code(single) == 1.0);

    auto h = hist({sc("1", "a", 1, 100, 0, range(1, 100)), sc("2", "b", 2, 30, 30, range(1, 30))});
    auto attr = attribute_lines(h);
    CHECK(highest_contrib_code(attr) == doctest::Approx(0.7));
    CHECK(minor_contributors(attr, h) == 0);

    // exactly 5% is still minor
    h = hist({sc("1", "a", 1, 100, 0, range(1, 100)), sc("2", "b", 2, 5, 5, range(1, 5))});
    attr = attribute_lines(h);
    CHECK(minor_contributors(attr, h) == 1);
    CHECK(minor_contributors(attribute_lines(hist({sc("1", "a", 1, 5, 0, range(1, 5))})),
                             hist({sc("1", "a", 1, 5, 0, range(1, 5))})) == 0);

    // a developer whose lines were all overwritten owns nothing and is minor
    h = hist({sc("1", "a", 1, 10, 0, range(1, 10)), sc("2", "b", 2, 2, 2, {1, 2}), sc("3", "a", 3, 2, 2, {1, 2})});
    attr = attribute_lines(h);
    CHECK(minor_contributors(attr, h) == 1);

    LineAttribution empty{"e.pp", {}};
    CHECK_THROWS_AS(highest_contrib_code(empty), UndefinedMetricError);
    CHECK_THROWS_AS(minor_contributors(empty, h), UndefinedMetricError);
}

TEST_CASE("developer count and commit size") {
    CHECK(developer_count(hist({sc("1", "a", 1, 1, 0, {1}), sc("2", "a", 2, 0, 0, {}), sc("3", "a", 3, 0, 0, {})})) == 1);
    CHECK(developer_count(hist({sc("1", "a", 1, 1, 0, {1}), sc("2", "b", 2, 0, 0, {}), sc("3", "c", 3, 0, 0, {})})) == 3);

    CHECK(norm_commit_size(hist({sc("1", "a", 1, 40, 0, range(1, 40))})) == 40.0);
    CHECK(norm_commit_size(hist({sc("1", "a", 1, 10, 0, range(1, 10)), sc("2", "a", 2, 15, 5, range(1, 15)),
                                 sc("3", "a", 3, 15, 15, range(1, 15))})) == doctest::Approx(20.0));
    CHECK(norm_commit_size(hist({sc("1", "a", 1, 0, 0, {}), sc("2", "a", 2, 0, 0, {})})) == 0.0);
}

TEST_CASE("scatteredness worked examples") {
    CHECK(scatteredness(fixture::scatter_script2()) == 2.0);
    // direct evaluation gives 1.0 where the worked text quotes 0.8
    CHECK(scatteredness(fixture::scatter_script1()) == 1.0);
    CHECK(scatteredness(fixture::scatter_script1()) == doctest::Approx(entropy_oracle({3, 3}, 6)));
    CHECK(scatteredness(hist({sc("1", "a", 1, 0, 0, {})})) == 0.0);
}

TEST_CASE("scatteredness matches the entropy oracle on random histories") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const int commits = static_cast<int>(rng.between(1, 8));
        std::vector<int> per_line(12, 0);
        std::vector<std::vector<std::int64_t>> lines;
        for (int c = 0; c < commits; ++c) {
            std::vector<std::int64_t> touched;
            for (int l = 1; l <= 12; ++l)
                if (rng.bernoulli(0.3)) {
                    touched.push_back(l);
                    ++per_line[l - 1];
                }
            lines.push_back(touched);
        }
        const double value = scatteredness(fixture::history_of("r.pp", lines));
        CHECK(value == doctest::Approx(entropy_oracle(per_line, commits)));
        CHECK(value >= 0.0);
    }
}

TEST_CASE("size and age") {
    auto h = hist({sc("1", "a", 1000, 3, 0, range(1, 3))});
    auto sa = size_and_age(h, attribute_lines(h));
    CHECK(sa.age_months == 0.0);
    CHECK(sa.size_loc == 3);

    h = hist({sc("1", "a", 1577836800, 3, 0, range(1, 3)), sc("2", "a", 1609459200, 1, 0, {4})});  // 2020-01-01 .. 2021-01-01
    sa = size_and_age(h, attribute_lines(h));
    CHECK(sa.age_months == doctest::Approx(366.0 / 30.44));  // 2020 is a leap year

    h = hist({sc("1", "a", 1, 3, 0, range(1, 3)), sc("2", "a", 2, 0, 3, {})});
    CHECK(size_and_age(h, attribute_lines(h)).size_loc == 0);
}

TEST_CASE("metric table assembly") {
    CHECK(metric_table({}).empty());

    auto commits = fixture::figure4_commits();
    Dataset ds{commits, {{"S3", false}, {"S4", true}, {"S5", true}, {"unused.pp", false}}};
    const auto table = metric_table(ds);
    REQUIRE(table.size() == 3);
    const auto& s5 = table[2];
    CHECK(s5.script_path == "S5");
    CHECK(s5.is_defective);
    CHECK(s5.developer_count == 2);
    CHECK(s5.unfocused_contribution == 1.0);
    CHECK(s5.highest_contrib_code.has_value());
    for (const auto& row : table) {
        CHECK(row.minor_contributors.value() <= row.developer_count);
        CHECK(row.disjointness >= 0.0);
        CHECK(row.disjointness <= 1.0);
    }

    // commit order does not matter
    std::reverse(commits.begin(), commits.end());
    ds.commits = commits;
    const auto again = metric_table(ds);
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(again[i].scatteredness == table[i].scatteredness);
        CHECK(again[i].disjointness == table[i].disjointness);
        CHECK(again[i].highest_contrib_code == table[i].highest_contrib_code);
    }
}

TEST_CASE("a disconnected repository leaves raw network metrics alone") {
    const auto base = fixture::figure3_commits();
    Dataset ds{base, {{"S1", false}, {"S2", false}, {"S3", false}, {"S4", false}}};
    const auto before = metric_table(ds, {false});

    auto extended = base;
    extended.push_back(fixture::touch("z1", "other1", 500, {"Z.pp"}));
    extended.push_back(fixture::touch("z2", "other2", 510, {"Z.pp"}));
    ds.commits = extended;
    ds.scripts.push_back({"Z.pp", true});
    const auto after = metric_table(ds, {false});
    REQUIRE(after.size() == before.size() + 1);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(after[i].disjointness == before[i].disjointness);
        CHECK(after[i].unfocused_contribution == before[i].unfocused_contribution);
        CHECK(after[i].scatteredness == before[i].scatteredness);
    }
}

TEST_CASE("properties over a generated repository") {
    synth::SynthOptions opt;
    opt.scripts = 25;
    const auto repo = synth::generate(opt);
    const auto histories = script_histories(repo.commits, [](std::string_view p) { return p.ends_with(".pp"); });
    for (const auto& [path, h] : histories) {
        const auto attr = attribute_lines(h);
        std::int64_t added = 0;
        for (const auto& c : h.commits) added += c.change.lines_added;
        CHECK(added >= static_cast<std::int64_t>(attr.per_line_author.size()));

        const auto own = ownership(attr);
        std::size_t total = 0;
        for (const auto& [_, n] : own) total += n;
        CHECK(total == attr.per_line_author.size());

        // minors plus major owners covers every committer
        std::set<std::string> committers;
        for (const auto& c : h.commits) committers.insert(c.author);
        std::size_t majors = 0;
        for (const auto& d : committers) {
            const auto it = own.find(d);
            if (it != own.end() && static_cast<double>(it->second) / static_cast<double>(attr.per_line_author.size()) > 0.05)
                ++majors;
        }
        CHECK(minor_contributors(attr, h) + majors == developer_count(h));
    }
}

TEST_CASE("metric CSV round trip") {
    MetricVector a;
    a.script_path = "m/a,b.pp";
    a.developer_count = 3;
    a.disjointness = 0.25;
    a.highest_contrib_code = 0.5;
    a.minor_contributors = 1;
    a.norm_commit_size = 12.125;
    a.scatteredness = 1.5;
    a.unfocused_contribution = 2.0;
    a.size_loc = 40;
    a.age_months = 3.5;
    a.is_defective = true;
    MetricVector b;
    b.script_path = "gone.pp";
    b.developer_count = 1;
    std::vector<MetricVector> table{a, b};
    std::ostringstream out;
    write_metric_csv(out, table);
    CHECK(out.str().rfind("script,developers,disjointness,highest_contrib,minors,norm_commit_size,scatteredness,unfocused,"
                          "size_loc,age_months,defective\n",
                          0) == 0);
    CHECK(out.str().find("0.250000") != std::string::npos);
    const auto back = parse_metric_csv(out.str());
    REQUIRE(back.size() == 2);
    CHECK(back[0].script_path == a.script_path);
    CHECK(back[0].highest_contrib_code == a.highest_contrib_code);
    CHECK(back[0].is_defective);
    CHECK_FALSE(back[1].highest_contrib_code.has_value());
    CHECK_FALSE(back[1].minor_contributors.has_value());
    CHECK_THROWS_AS(parse_metric_csv("script,x\n"), ParseError);
}
