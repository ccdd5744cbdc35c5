#include "signmotion/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "signmotion/common/error.hpp"

namespace signmotion {

void EvalConfig::validate() const {
    require(diversity_size >= 2, ErrorCode::config, "S_d must be at least 2");
    require(multimodality_size >= 2, ErrorCode::config, "S_l must be at least 2");
    require(words >= 0, ErrorCode::config, "C must be non-negative");
}

nlohmann::json to_json(const EvalConfig& c) {
    return {{"S_d", c.diversity_size}, {"S_l", c.multimodality_size}, {"C", c.words}, {"seed", c.seed}};
}

EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig c) {
    try {
        c.diversity_size = j.value("S_d", c.diversity_size);
        c.multimodality_size = j.value("S_l", c.multimodality_size);
        c.words = j.value("C", c.words);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("eval config: ") + e.what());
    }
    return c;
}

const EvalCell& EvalReport::cell(const std::string& group, const std::string& split) const {
    for (const auto& c : cells)
        if (c.group == group && c.split == split) return c;
    fail(ErrorCode::invalid_argument, "report has no cell " + group + "_" + split);
}

EvalReport full_report(const MotionClassifier& classifier, const EvalGroups& groups, const EvalConfig& config) {
    config.validate();
    for (const char* g : kEvalGroups)
        for (const char* s : kEvalSplits) {
            const std::string key = std::string(g) + "_" + s;
            require(groups.count(key) == 1, ErrorCode::config, "evaluation group " + key + " is missing");
            const auto& lm = groups.at(key);
            require(lm.motions.size() == lm.labels.size(), ErrorCode::config, key + ": motions and labels differ in count");
        }

    EvalReport report;
    report.config = config;
    for (const char* s : kEvalSplits) {
        FeatureSet raw_features;
        std::size_t raw_index = 0;
        for (const char* g : kEvalGroups) {
            const auto& lm = groups.at(std::string(g) + "_" + s);
            EvalCell cell;
            cell.group = g;
            cell.split = s;
            cell.count = lm.motions.size();
            cell.accuracy = accuracy(classifier, lm.motions, lm.labels);

            FeatureSet features;
            std::map<std::string, FeatureSet> by_word;
            for (std::size_t i = 0; i < lm.motions.size(); ++i) {
                features.push_back(classifier.features(lm.motions[i]));
                by_word[lm.labels[i]].push_back(features.back());
            }
            const bool is_raw = cell.group == "Raw";
            if (is_raw) raw_features = features;
            cell.fid = is_raw ? 0.0 : fid(raw_features, features);

            const auto div = diversity(features, config.diversity_size, config.seed);
            cell.diversity = div.value;
            cell.diversity_with_replacement = div.with_replacement;
            const int words = config.words > 0 ? config.words : static_cast<int>(by_word.size());
            const auto mm = multimodality(by_word, words, config.multimodality_size, config.seed);
            cell.multimodality = mm.value;
            cell.multimodality_with_replacement = mm.with_replacement;
            if (!is_raw) {
                cell.diversity_gap = std::abs(cell.diversity - report.cells[raw_index].diversity);
                cell.multimodality_gap = std::abs(cell.multimodality - report.cells[raw_index].multimodality);
            }
            if (is_raw) raw_index = report.cells.size();
            report.cells.push_back(cell);
        }
    }
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : report.cells)
        rows.push_back({{"group", c.group},
                        {"split", c.split},
                        {"count", c.count},
                        {"accuracy", c.accuracy},
                        {"fid", c.fid},
                        {"diversity", c.diversity},
                        {"diversity_gap", c.diversity_gap},
                        {"diversity_with_replacement", c.diversity_with_replacement},
                        {"multimodality", c.multimodality},
                        {"multimodality_gap", c.multimodality_gap},
                        {"multimodality_with_replacement", c.multimodality_with_replacement}});
    return {{"config", to_json(report.config)}, {"rows", rows}};
}

std::string format_report_table(const EvalReport& report) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-11s %9s %11s %-20s %-20s\n", "group", "accuracy", "fid", "diversity (gap)",
                  "multimodality (gap)");
    os << line;
    for (const auto& c : report.cells) {
        char div[64], mm[64];
        std::snprintf(div, sizeof div, "%.4f (%.4f)%s", c.diversity, c.diversity_gap,
                      c.diversity_with_replacement ? "*" : "");
        std::snprintf(mm, sizeof mm, "%.4f (%.4f)%s", c.multimodality, c.multimodality_gap,
                      c.multimodality_with_replacement ? "*" : "");
        std::snprintf(line, sizeof line, "%-11s %9.4f %11.4f %-20s %-20s\n", (c.group + "_" + c.split).c_str(),
                      c.accuracy, c.fid, div, mm);
        os << line;
    }
    os << "* sampled with replacement\n";
    return os.str();
}

}  // namespace signmotion
