#pragma once

#include "devminer/history.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace devminer::synth {

/// Generator for a repository whose script labels are a noisy function of
/// developer and minor-contributor counts.
struct SynthOptions {
    std::size_t scripts = 300;
    std::size_t developer_pool = 60;
    std::size_t non_iac_files = 80;
    int months = 24;
    std::uint64_t seed = 7;
    double score_noise = 0.5;   ///< sd of the noise added to the latent risk score
    double label_flip = 0.02;   ///< probability a label is flipped after thresholding
    /// Keep neutral scripts within 11 developers and 7 minor contributors.
    bool constrain_neutral = false;
    /// Extra defective scripts with more than 11 developers and 7 minors.
    std::size_t violators = 0;
};

struct ScriptPlan {
    std::string path;
    std::size_t developers = 0;
    std::size_t minors = 0;
    bool defective = false;
    bool violator = false;
    std::size_t final_lines = 0;
};

struct SyntheticRepo {
    std::vector<history::CommitRecord> commits;  ///< chronological
    std::vector<ScriptPlan> plans;               ///< sorted by path
    std::map<std::string, std::string> script_texts;
    std::map<std::string, std::string> issues;   ///< issue id -> summary
};

SyntheticRepo generate(const SynthOptions& options);

/// Writes `history.jsonl`, `issues.json` and the scripts under `scripts/`.
void write_repository(const SyntheticRepo& repo, const std::filesystem::path& dir);

}  // namespace devminer::synth
