#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "signmotion/dataset/dataset.hpp"
#include "signmotion/eval/classifier.hpp"
#include "signmotion/eval/report.hpp"
#include "signmotion/model/cvae.hpp"
#include "signmotion/semantic/embedding.hpp"
#include "signmotion/training/curriculum.hpp"

namespace signmotion {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything a run reads from the JSON config file, with flags applied on top.
struct RunConfig {
    ModelConfig model;
    TrainConfig train;
    ProviderConfig embedding;
    ClassifierConfig classifier;
    EvalConfig eval;
};

// Small enough to train on one CPU core in a couple of minutes.
ModelConfig desk_model_config();
TrainConfig desk_train_config();

nlohmann::json to_json(const ProviderConfig& c);
ProviderConfig provider_config_from_json(const nlohmann::json& j, ProviderConfig base = {});
nlohmann::json to_json(const ClassifierConfig& c);
ClassifierConfig classifier_config_from_json(const nlohmann::json& j, ClassifierConfig base = {});

nlohmann::json to_json(const RunConfig& c);
// Sections: "model", "train", "embedding", "classifier", "eval".
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// Reproducibility stamp: hash of the canonical config, seed and versions.
nlohmann::json make_stamp(const std::string& command, const nlohmann::json& config, std::uint64_t seed);
void write_stamp_sidecar(const std::filesystem::path& artifact, const nlohmann::json& stamp);

struct DatasetTrainResult {
    TrainResult train;
    std::vector<std::string> vocabulary;
};

// Trains on the train split of a prepared manifest.  Every gloss is embedded
// before the first epoch; a failure there is a config error.
DatasetTrainResult train_from_manifest(CvaeModel& model, const DatasetManifest& manifest, const RunConfig& config,
                                       const std::filesystem::path& out_dir);

// Loads samples for one split of a manifest from their containers.
std::vector<Motion> load_split(const DatasetManifest& manifest, Split split, std::vector<std::string>* labels = nullptr,
                               std::vector<std::string>* clip_ids = nullptr);

}  // namespace signmotion
