#include "devminer/synthetic.hpp"

#include "devminer/error.hpp"
#include "devminer/io.hpp"
#include "devminer/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace devminer::synth {

namespace {

constexpr std::int64_t kEpoch = 1451606400;  // 2016-01-01T00:00:00Z
constexpr std::int64_t kMonth = 2629743;     // 30.44 days
constexpr double kRiskThreshold = 11.0;

std::string module_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "mod_%03zu", i);
    return buf;
}

std::string developer_email(std::size_t i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "dev%02zu@example.org", i);
    return buf;
}

std::string commit_id(Rng& rng) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%016llx%016llx%08llx", static_cast<unsigned long long>(rng.next()),
                  static_cast<unsigned long long>(rng.next()), static_cast<unsigned long long>(rng.next() & 0xffffffffULL));
    return buf;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[rng.index(v.size())];
}

const std::vector<std::string> kNeutralMessages{
    "Update {m} parameters",      "Add support for Ubuntu in {m}", "Refactor {m} resources",
    "Tidy whitespace in {m}",     "Bump {m} module version",       "Document {m} class parameters",
    "Rename variables in {m}",    "Move {m} settings to hiera",    "Add monitoring hooks to {m}",
    "Use new package name in {m}"};

const std::vector<std::string> kDefectMessages{
    "Fix wrong permissions on {m} config", "Fix service ordering in {m}",     "Correct incorrect default in {m}",
    "Revert {m} package pin",             "{m} crash on first run resolved", "Fix typo that broke {m}"};

const std::vector<std::string> kNeutralSummaries{"Add support for new hosts", "Improve module layout",
                                                 "Switch to upstream packages", "Expose tuning knobs"};
const std::vector<std::string> kDefectSummaries{"Puppet run failure when service starts early",
                                                "Agent crash during catalog apply", "Wrong owner on generated files"};

std::string render(std::string text, const std::string& module) {
    for (auto pos = text.find("{m}"); pos != std::string::npos; pos = text.find("{m}", pos)) text.replace(pos, 3, module);
    return text;
}

struct Event {
    std::size_t author;
    history::FileChange change;
    bool creation = false;
};

/// Puppet-looking text with exactly `lines` lines; content is independent of labels.
std::string script_text(const std::string& module, std::size_t lines, std::size_t total_modules, Rng& rng) {
    std::vector<std::string> out;
    const std::size_t params = rng.index(4);
    if (params == 0) {
        out.push_back("class " + module + " {");
    } else {
        out.push_back("class " + module + " (");
        for (std::size_t p = 0; p < params; ++p) out.push_back("  $param_" + std::to_string(p) + " = 'value',");
        out.push_back(") {");
    }
    static const std::vector<std::string> words{"alpha", "bravo", "delta", "kilo", "lima", "oscar", "tango", "zulu"};
    std::size_t k = 0;
    while (out.size() + 1 < lines) {
        const std::size_t room = lines - 1 - out.size();
        const auto kind = rng.index(8);
        const std::string id = std::to_string(k++);
        if (kind == 0 && room >= 4) {
            out.push_back("  case $facts['os']['family'] {");
            out.push_back("    'RedHat': { $pkg_" + id + " = '" + pick(rng, words) + "' }");
            out.push_back("    default: { $pkg_" + id + " = '" + pick(rng, words) + "' }");
            out.push_back("  }");
        } else if (kind == 1) {
            out.push_back("  file { '/etc/" + module + "/" + pick(rng, words) + "_" + id + "': ensure => file, mode => '0644' }");
        } else if (kind == 2) {
            out.push_back("  package { '" + pick(rng, words) + "-" + id + "': ensure => installed }");
        } else if (kind == 3) {
            out.push_back("  service { '" + pick(rng, words) + "_" + id + "': ensure => running, enable => true }");
        } else if (kind == 4) {
            out.push_back("  exec { 'run_" + id + "': command => '/usr/bin/" + pick(rng, words) + "', refreshonly => true }");
        } else if (kind == 5) {
            out.push_back("  if $" + pick(rng, words) + "_enabled { notify { '" + pick(rng, words) + "_" + id + "': } }");
        } else if (kind == 6) {
            out.push_back("  include " + module_name(rng.index(total_modules)));
        } else {
            out.push_back("  $" + pick(rng, words) + "_" + id + " = '" + pick(rng, words) + "'");
        }
    }
    out.push_back("}");
    std::string text;
    for (const auto& l : out) text += l + "\n";
    return text;
}

history::FileChange rewrite(const std::string& path, std::int64_t first, std::int64_t count) {
    history::FileChange c{path, count, count, {}};
    for (std::int64_t i = 0; i < count; ++i) c.modified_lines.push_back(first + i);
    return c;
}

}  // namespace

SyntheticRepo generate(const SynthOptions& options) {
    if (options.scripts == 0) throw ArgumentError("synthetic repository needs at least one script");
    if (options.developer_pool < 20) throw ArgumentError("developer pool must hold at least 20 developers");
    if (options.months < 2) throw ArgumentError("synthetic history must span at least two months");
    Rng rng(options.seed);
    SyntheticRepo repo;
    const std::int64_t span = kMonth * options.months;
    const std::size_t total = options.scripts + options.violators;

    for (std::size_t s = 0; s < total; ++s) {
        const std::string module = module_name(s);
        ScriptPlan plan;
        plan.path = "modules/" + module + "/manifests/init.pp";
        if (s < options.scripts) {
            plan.developers = static_cast<std::size_t>(rng.between(1, 12));
            plan.minors = static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(std::min<std::size_t>(plan.developers - 1, 8))));
            const double risk = static_cast<double>(plan.developers) + 1.5 * static_cast<double>(plan.minors) +
                                rng.normal(0.0, options.score_noise);
            plan.defective = risk > kRiskThreshold;
            if (rng.bernoulli(options.label_flip)) plan.defective = !plan.defective;
            if (options.constrain_neutral && !plan.defective) {
                plan.developers = std::min<std::size_t>(plan.developers, 11);
                plan.minors = std::min<std::size_t>(plan.minors, 7);
            }
        } else {
            plan.violator = true;
            plan.defective = true;
            plan.developers = static_cast<std::size_t>(rng.between(13, 16));
            plan.minors = static_cast<std::size_t>(rng.between(8, 10));
        }

        // distinct authors: [0] creator, then majors, then minors
        std::vector<std::size_t> pool(options.developer_pool);
        std::iota(pool.begin(), pool.end(), 0);
        rng.shuffle(std::span<std::size_t>(pool));
        const std::vector<std::size_t> authors(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(plan.developers));
        const std::size_t majors = plan.developers - plan.minors - 1;

        // size the file so every major keeps more than 5% and the creator more than 10%
        std::int64_t initial = rng.between(120, 200);
        std::vector<std::int64_t> appends(rng.index(3));
        for (auto& a : appends) a = rng.between(3, 8);
        const std::int64_t appended = std::accumulate(appends.begin(), appends.end(), std::int64_t{0});
        std::int64_t final_len = 0, block = 0;
        constexpr std::int64_t kHeader = 10;
        for (;;) {
            final_len = initial + appended;
            block = final_len * 6 / 100 + 1;
            const std::int64_t creator_left =
                initial - static_cast<std::int64_t>(majors) * block - static_cast<std::int64_t>(plan.minors);
            if (creator_left * 10 > final_len) break;
            initial += 10;
        }
        plan.final_lines = static_cast<std::size_t>(final_len);

        std::vector<Event> events;
        events.push_back({authors[0], rewrite(plan.path, 1, initial), true});
        events.back().change.lines_deleted = 0;
        for (std::size_t j = 0; j < majors; ++j) {
            const std::int64_t start = kHeader + 1 + static_cast<std::int64_t>(j) * block;
            events.push_back({authors[1 + j], rewrite(plan.path, start, block), false});
            for (std::size_t extra = rng.index(3); extra > 0; --extra) {
                const std::int64_t len = rng.between(1, block);
                const std::int64_t off = rng.between(0, block - len);
                events.push_back({authors[1 + j], rewrite(plan.path, start + off, len), false});
            }
        }
        // minors rewrite one distinct line each in the creator's remaining region
        const std::int64_t free_start = kHeader + 1 + static_cast<std::int64_t>(majors) * block;
        std::vector<std::int64_t> free_lines(static_cast<std::size_t>(initial - free_start + 1));
        std::iota(free_lines.begin(), free_lines.end(), free_start);
        rng.shuffle(std::span<std::int64_t>(free_lines));
        for (std::size_t j = 0; j < plan.minors; ++j)
            events.push_back({authors[1 + majors + j], rewrite(plan.path, free_lines[j], 1), false});
        std::int64_t length = initial;
        for (const auto a : appends) {
            history::FileChange c{plan.path, a, 0, {}};
            for (std::int64_t i = 1; i <= a; ++i) c.modified_lines.push_back(length + i);
            length += a;
            events.push_back({authors[0], c, false});
        }
        for (std::size_t extra = rng.index(3); extra > 0 || events.size() < 2; extra = extra > 0 ? extra - 1 : 0) {
            const std::int64_t line = rng.between(1, kHeader);
            events.push_back({authors[0], rewrite(plan.path, line, 1), false});
        }
        // appends must keep their order to keep line numbers valid; shuffle the rest around them
        std::vector<Event> tail(events.begin() + 1, events.end());
        std::vector<std::size_t> order(tail.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<std::size_t> append_slots;
        for (std::size_t i = 0; i < order.size(); ++i)
            if (tail[order[i]].change.lines_deleted == 0) append_slots.push_back(i);
        std::vector<std::size_t> append_ids;
        for (std::size_t i = 0; i < tail.size(); ++i)
            if (tail[i].change.lines_deleted == 0) append_ids.push_back(i);
        for (std::size_t k = 0; k < append_slots.size(); ++k) order[append_slots[k]] = append_ids[k];

        // timestamps
        const std::int64_t created = kEpoch + static_cast<std::int64_t>(rng.uniform() * 0.5 * static_cast<double>(span));
        std::vector<std::int64_t> times(tail.size());
        for (auto& t : times) t = created + 3600 + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(kEpoch + span - created - 7200));
        std::sort(times.begin(), times.end());
        const std::size_t defect_event = plan.defective ? rng.index(tail.size()) : tail.size();

        auto emit = [&](const Event& e, std::int64_t ts, bool defect) {
            history::CommitRecord c;
            c.id = commit_id(rng);
            c.author = developer_email(e.author);
            c.timestamp = ts;
            if (e.creation) {
                c.message = "Add " + module + " module";
            } else if (defect) {
                if (rng.bernoulli(0.3)) {
                    const std::string issue = "OPS-" + std::to_string(1000 + repo.issues.size());
                    repo.issues[issue] = pick(rng, kDefectSummaries);
                    c.message = render("Adjust {m} service settings (" + issue + ")", module);
                } else {
                    c.message = render(pick(rng, kDefectMessages), module);
                }
            } else if (rng.bernoulli(0.1)) {
                const std::string issue = "OPS-" + std::to_string(1000 + repo.issues.size());
                repo.issues[issue] = pick(rng, kNeutralSummaries);
                c.message = render("Rework {m} layout (" + issue + ")", module);
            } else {
                c.message = render(pick(rng, kNeutralMessages), module);
            }
            c.changes.push_back(e.change);
            repo.commits.push_back(std::move(c));
        };
        emit(events.front(), created, false);
        for (std::size_t i = 0; i < order.size(); ++i) emit(tail[order[i]], times[i], order[i] == defect_event);

        repo.script_texts[plan.path] = script_text(module, plan.final_lines, total, rng);
        repo.plans.push_back(std::move(plan));
    }

    // non-IaC churn keeps the script share realistic
    for (std::size_t f = 0; f < options.non_iac_files; ++f) {
        const std::string path = "modules/" + module_name(rng.index(total)) + "/templates/file_" + std::to_string(f) + ".erb";
        for (int k = 0; k < 2; ++k) {
            history::CommitRecord c;
            c.id = commit_id(rng);
            c.author = developer_email(rng.index(options.developer_pool));
            c.timestamp = kEpoch + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(span));
            c.message = k == 0 ? "Add template " + std::to_string(f) : "Update template " + std::to_string(f);
            const std::int64_t n = rng.between(5, 30);
            c.changes.push_back(k == 0 ? rewrite(path, 1, n) : rewrite(path, 1, std::min<std::int64_t>(n, 5)));
            if (k == 0) c.changes.back().lines_deleted = 0;
            repo.commits.push_back(std::move(c));
        }
    }

    std::stable_sort(repo.commits.begin(), repo.commits.end(), [](const auto& a, const auto& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
    });
    std::sort(repo.plans.begin(), repo.plans.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return repo;
}

void write_repository(const SyntheticRepo& repo, const std::filesystem::path& dir) {
    std::ostringstream log;
    history::write_log_export(log, repo.commits);
    io::write_text(dir / "history.jsonl", log.str());
    nlohmann::ordered_json issues = nlohmann::ordered_json::object();
    for (const auto& [id, summary] : repo.issues) issues[id] = summary;
    io::write_text(dir / "issues.json", issues.dump(2) + "\n");
    for (const auto& [path, text] : repo.script_texts) io::write_text(dir / "scripts" / path, text);
}

}  // namespace devminer::synth
