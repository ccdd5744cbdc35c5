#pragma once

#include <array>
#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "signmotion/eval/classifier.hpp"
#include "signmotion/eval/metrics.hpp"

namespace signmotion {

struct EvalConfig {
    int diversity_size = 200;      // S_d
    int multimodality_size = 20;  // S_l
    int words = 0;                 // C; 0 takes every word in the group
    std::uint64_t seed = 0;

    void validate() const;
};

nlohmann::json to_json(const EvalConfig& c);
EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig base = {});

struct LabeledMotions {
    std::vector<Motion> motions;
    std::vector<std::string> labels;
};

inline constexpr std::array<const char*, 3> kEvalGroups = {"Raw", "Rec", "Gen"};
inline constexpr std::array<const char*, 2> kEvalSplits = {"train", "test"};

// Keyed "<group>_<split>", e.g. "Gen_test".
using EvalGroups = std::map<std::string, LabeledMotions>;

struct EvalCell {
    std::string group, split;
    std::size_t count = 0;
    double accuracy = 0.0;
    double fid = 0.0;
    double diversity = 0.0;
    double multimodality = 0.0;
    bool diversity_with_replacement = false;
    bool multimodality_with_replacement = false;
    // |value - Raw value| for the same split.
    double diversity_gap = 0.0;
    double multimodality_gap = 0.0;
};

struct EvalReport {
    EvalConfig config;
    std::vector<EvalCell> cells;  // Raw, Rec, Gen x train, test

    const EvalCell& cell(const std::string& group, const std::string& split) const;
};

// FID reference is Raw of the same split; Raw rows are 0 by definition.
EvalReport full_report(const MotionClassifier& classifier, const EvalGroups& groups, const EvalConfig& config);

nlohmann::json to_json(const EvalReport& report);
std::string format_report_table(const EvalReport& report);

}  // namespace signmotion
