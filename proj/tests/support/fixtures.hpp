#pragma once

#include "devminer/history.hpp"
#include "devminer/metrics.hpp"
#include "devminer/networks.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fixture {

using devminer::history::CommitRecord;
using devminer::history::FileChange;

inline FileChange change(std::string path, std::int64_t added, std::int64_t deleted, std::vector<std::int64_t> lines) {
    return FileChange{std::move(path), added, deleted, std::move(lines)};
}

inline CommitRecord commit(std::string id, std::string author, std::int64_t ts, std::vector<FileChange> changes,
                           std::string message = "update") {
    return CommitRecord{std::move(id), std::move(author), ts, std::move(message), std::move(changes)};
}

/// One commit per (author, script) touch; the script body itself is irrelevant.
inline CommitRecord touch(std::string id, std::string author, std::int64_t ts, const std::vector<std::string>& scripts) {
    std::vector<FileChange> changes;
    for (const auto& s : scripts) changes.push_back(change(s, 1, 0, {1}));
    return commit(std::move(id), std::move(author), ts, std::move(changes));
}

/// Contribution network of the S5 worked example. Dev3-S5-Dev6 has length 3
/// and Dev3-S4-Dev5-S3-Dev6 length 6.
inline std::vector<CommitRecord> figure4_commits() {
    return {
        touch("c1", "dev3", 100, {"S5"}),
        touch("c2", "dev6", 110, {"S5"}),
        touch("c3", "dev6", 120, {"S5"}),
        touch("c4", "dev3", 130, {"S4"}),
        touch("c5", "dev5", 140, {"S4"}),
        touch("c6", "dev5", 150, {"S4"}),
        touch("c7", "dev5", 160, {"S3"}),
        touch("c8", "dev6", 170, {"S3"}),
        touch("c9", "dev6", 180, {"S3"}),
    };
}

/// Developer network with S1 shared by dev4 and dev5; S2 links a triangle.
inline std::vector<CommitRecord> figure3_commits() {
    return {
        touch("d1", "dev4", 100, {"S1"}),
        touch("d2", "dev5", 110, {"S1"}),
        touch("d3", "dev1", 120, {"S2"}),
        touch("d4", "dev2", 130, {"S2"}),
        touch("d5", "dev3", 140, {"S2", "S3"}),
        touch("d6", "dev4", 150, {"S3"}),
        touch("d7", "dev5", 160, {"S4"}),
        touch("d8", "dev6", 170, {"S4"}),
    };
}

inline devminer::metrics::ScriptHistory history_of(std::string path,
                                                   const std::vector<std::vector<std::int64_t>>& per_commit_lines) {
    devminer::metrics::ScriptHistory h;
    h.script_path = path;
    std::int64_t ts = 1000;
    int i = 0;
    for (const auto& lines : per_commit_lines) {
        const auto n = static_cast<std::int64_t>(lines.size());
        h.commits.push_back({"s" + std::to_string(i++), "dev", ts, change(path, n, n, lines)});
        ts += 60;
    }
    return h;
}

/// 10 LOC, six commits, lines 6 and 7 modified in three of them.
inline devminer::metrics::ScriptHistory scatter_script1() {
    return history_of("script1.pp", {{6, 7}, {6, 7}, {6, 7}, {}, {}, {}});
}

/// 7 LOC, four commits, lines 1, 2, 6 and 7 modified once each.
inline devminer::metrics::ScriptHistory scatter_script2() {
    return history_of("script2.pp", {{1}, {2}, {6}, {7}});
}

}  // namespace fixture
