#include "devminer/error.hpp"
#include "devminer/features.hpp"
#include "devminer/io.hpp"
#include "devminer/random.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace devminer;
using namespace devminer::features;
namespace fs = std::filesystem;

using Counts = std::map<std::string, std::size_t>;

TEST_CASE("bag of words") {
    CHECK(bow_extract("package { 'ntp': }").token_counts == Counts{{"package", 1}, {"ntp", 1}});
    CHECK(bow_extract("").token_counts.empty());
    CHECK(bow_extract("A a A").token_counts == Counts{{"a", 3}});
    CHECK(bow_extract("ensure => 'Running', ensure_2").token_counts == Counts{{"ensure", 2}, {"running", 1}, {"2", 1}});
    CHECK(bow_extract("x", "m/a.pp").script_path == "m/a.pp");
}

TEST_CASE("malformed UTF-8 reports its offset") {
    CHECK(first_invalid_utf8("héllo") == std::string_view::npos);
    const std::string bad = std::string("abc") + '\xff' + "def";
    CHECK(first_invalid_utf8(bad) == 3);
    try {
        bow_extract(bad);
        FAIL("expected an encoding error");
    } catch (const EncodingError& e) {
        CHECK(e.offset == 3);
    }
    CHECK(first_invalid_utf8(std::string("ok") + '\xc3') == 2);  // truncated sequence
}

TEST_CASE("bag of words is additive across a newline boundary") {
    Rng rng(61);
    const std::vector<std::string> pieces{"file", "{", "'x'", "Ensure", "=>", "present", "$var", "::", "42", "#c", "\t"};
    for (int t = 0; t < 100; ++t) {
        std::string a, b;
        for (int i = 0; i < 8; ++i) a += pieces[rng.index(pieces.size())] + " ";
        for (int i = 0; i < 8; ++i) b += pieces[rng.index(pieces.size())] + " ";
        auto sum = bow_extract(a).token_counts;
        for (const auto& [k, v] : bow_extract(b).token_counts) sum[k] += v;
        CHECK(bow_extract(a + "\n" + b).token_counts == sum);
    }
}

TEST_CASE("quality scan of a single script") {
    const auto ifelse = scan_script(
        "class web {\n"
        "  if $enable {\n"
        "    notify { 'on': }\n"
        "  } else {\n"
        "    notify { 'off': }\n"
        "  }\n"
        "}\n");
    CHECK(ifelse.quality.complexity == 1);
    CHECK(ifelse.quality.filelength == 7);
    CHECK(ifelse.declared_classes == std::vector<std::string>{"web"});

    const auto params = scan_script("class ntp($servers, $ensure) {\n  $local = 1\n}\n");
    CHECK(params.quality.parameters == 2);

    const auto with_defaults = scan_script("define site::vhost($port = 80, $docroot = $::fqdn) { }\n");
    CHECK(with_defaults.quality.parameters == 2);

    const auto cases = scan_script(
        "case $osfamily {\n"
        "  'Debian': { $pkg = 'ntp' }\n"
        "  'RedHat', 'Suse': { $pkg = 'ntpd' }\n"
        "  default: { fail('x') }\n"
        "}\n"
        "unless $x { }\n");
    CHECK(cases.quality.complexity == 1 + 3 + 1);

    const auto execs = scan_script(
        "exec { 'apt-update': command => '/usr/bin/apt-get update' }\n"
        "exec { 'other': }\n"
        "# exec { 'commented': }\n"
        "notify { 'exec in a string': }\n");
    CHECK(execs.quality.execs == 2);
}

TEST_CASE("fan-in counts other scripts naming a declared class") {
    const std::vector<ScriptSource> scripts{
        {"ntp.pp", "class ntp { }\nclass ntp::config { }\n"},
        {"a.pp", "include ntp\n"},
        {"b.pp", "require ntp::config\n"},
        {"c.pp", "class c { include ::ntp }\n"},
    };
    const auto q = scan_quality(scripts, {{"a.pp", 4}});
    REQUIRE(q.size() == 4);
    CHECK(q[0].fan_in == 3);
    CHECK(q[1].fan_in == 0);
    CHECK(q[1].lint_warnings == 4);
    CHECK(q[2].lint_warnings == 0);
    CHECK(scan_quality(scripts[0], scripts).fan_in == 3);

    // a class declared twice gives both declaring scripts the edge
    const std::vector<ScriptSource> dup{{"x.pp", "class shared { }"}, {"y.pp", "class shared { }"}, {"z.pp", "include shared"}};
    const auto d = scan_quality(dup);
    CHECK(d[0].fan_in == 1);
    CHECK(d[1].fan_in == 1);

    std::size_t resolutions = 0, total = 0;
    for (const auto& s : scripts) {
        for (const auto& ref : scan_script(s.text).referenced_classes)
            for (const auto& other : scripts)
                if (other.path != s.path) {
                    const auto decl = scan_script(other.text).declared_classes;
                    resolutions += std::count(decl.begin(), decl.end(), ref) > 0;
                }
    }
    for (const auto& v : q) total += v.fan_in;
    CHECK(total == resolutions);
}

TEST_CASE("scanner never fails on odd input") {
    Rng rng(67);
    const std::string alphabet = "{}()[]$:'\"#/*\\,=>ifcasexecunlessclassdefine \n\t";
    for (int t = 0; t < 300; ++t) {
        std::string text;
        const auto len = rng.between(0, 80);
        for (int i = 0; i < len; ++i) text += alphabet[rng.index(alphabet.size())];
        CHECK_NOTHROW(scan_script(text));
        CHECK_NOTHROW(bow_extract(text));
    }
}

TEST_CASE("feature CSV round trips") {
    std::vector<BowVector> bow{{"a.pp", {{"file", 2}, {"x", 1}}}, {"b,c.pp", {{"y", 3}}}};
    std::ostringstream out;
    write_bow_csv(out, bow);
    CHECK(out.str().rfind("script,token,count\n", 0) == 0);
    const auto back = parse_bow_csv(out.str());
    REQUIRE(back.size() == 2);
    CHECK(back[0].script_path == "a.pp");
    CHECK(back[0].token_counts == bow[0].token_counts);
    CHECK(back[1].token_counts == bow[1].token_counts);
    CHECK_THROWS_AS(parse_bow_csv("script,token,count\na.pp,x,0\n"), ParseError);

    std::vector<CodeQualityVector> q{{"a.pp", 10, 2, 1, 0, 3, 4}};
    std::ostringstream qout;
    write_quality_csv(qout, q);
    const auto qb = parse_quality_csv(qout.str());
    REQUIRE(qb.size() == 1);
    CHECK(qb[0].filelength == 10);
    CHECK(qb[0].fan_in == 4);
    CHECK(quality_feature_names().size() == 6);

    CHECK(parse_lint_csv("script,lint_warnings\na.pp,3\n") == std::map<std::string, std::size_t>{{"a.pp", 3}});
    CHECK_THROWS_AS(parse_lint_csv("a,b\n"), ParseError);
}

TEST_CASE("script loading") {
    const auto dir = fs::temp_directory_path() / "devminer_features_load";
    fs::remove_all(dir);
    io::write_text(dir / "m" / "init.pp", "class m { }\n");
    io::write_text(dir / "a.pp", "include m\n");
    io::write_text(dir / "t.erb", "<%= x %>\n");
    const auto scripts = load_scripts(dir);
    REQUIRE(scripts.size() == 2);
    CHECK(scripts[0].path == "a.pp");
    CHECK(scripts[1].path == "m/init.pp");
    CHECK_THROWS_AS(load_scripts(dir / "missing"), IngestError);
}
