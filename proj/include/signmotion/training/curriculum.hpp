#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "signmotion/model/checkpoint.hpp"
#include "signmotion/model/cvae.hpp"

namespace signmotion {

// g(ep) = min(increment * floor(ep / step), cap).
struct MaskSchedule {
    int step = 500;
    double increment = 0.1;
    double cap = 0.6;
};

double mask_ratio_schedule(int epoch, const MaskSchedule& schedule = {});

struct TrainConfig {
    int epochs = 5000;
    int batch_size = 16;
    double learning_rate = 1e-4;
    double w_kl = 1e-5;
    std::uint64_t seed = 0;
    bool curriculum_enabled = true;
    int checkpoint_every = 500;
    MaskSchedule schedule;

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

// floor(r * T) frames, with a small epsilon so exact products do not round low.
int mask_count(int frames, double ratio);

struct MaskPlan {
    int epoch = 0;
    double ratio = 0.0;
    std::vector<int> indices;  // sorted, unique
};

// The input keeps its values; the flagged frames are swapped for the model's
// mask token inside the encoder.  The loss target is always the full motion.
struct MaskedMotion {
    Motion motion;
    std::vector<int> masked;
};

MaskedMotion apply_mask(const Motion& motion, double ratio, std::uint64_t seed);
std::vector<int> sample_mask_indices(int frames, double ratio, std::uint64_t seed);

struct TrainingSample {
    Motion motion;
    SemanticEmbedding condition;
};

struct LogRow {
    int epoch = 0;
    double mask_ratio = 0.0;
    double rec_loss = 0.0;
    double kl_loss = 0.0;
    double total_loss = 0.0;
};

std::string log_header();
std::string format_log_row(const LogRow& row);

struct TrainOutputs {
    std::filesystem::path dir;               // empty: keep everything in memory
    nlohmann::json metadata = nlohmann::json::object();  // embedded into checkpoints
};

// Captures what one step fed into the objective; used by tests to confirm
// that masking never touches the reconstruction target.
struct StepProbe {
    std::function<void(const MaskPlan& plan, const nn::Matrix& target)> on_sample;
};

struct TrainResult {
    std::vector<LogRow> log;
    int epochs_run = 0;
};

// Minimizes rec + w_kl * KL over the full sequence, with the per-epoch mask
// ratio from the schedule (or 0 when the curriculum is off).  Deterministic
// for a given seed.
TrainResult train(CvaeModel& model, const std::vector<TrainingSample>& samples, const TrainConfig& config,
                  const TrainOutputs& outputs = {}, const StepProbe* probe = nullptr);

}  // namespace signmotion
