#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>

#include "signmotion/model/cvae.hpp"
#include "signmotion/nn/adam.hpp"

namespace signmotion {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointState {
    int epoch = 0;
    std::string rng_state;
    nlohmann::json train_config = nlohmann::json::object();
    // Free-form run metadata: vocabulary, embedding provider, stamp.
    nlohmann::json metadata = nlohmann::json::object();
    std::optional<nn::Adam> optimizer;
};

struct LoadedCheckpoint {
    CvaeModel model;
    CheckpointState state;
};

// Tensor archive holding config, parameters, optimizer moments, epoch and
// RNG state.  Written through a temporary file and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const CvaeModel& model, const CheckpointState& state);

// Missing files raise a state error; unknown versions a format error.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace signmotion
