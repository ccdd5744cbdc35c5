#include "signmotion/training/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "signmotion/common/error.hpp"
#include "signmotion/common/rng.hpp"

namespace signmotion {

using nn::Graph;
using nn::Matrix;
using nn::Var;

double mask_ratio_schedule(int epoch, const MaskSchedule& s) {
    require(epoch >= 0, ErrorCode::invalid_argument, "mask_ratio_schedule: negative epoch");
    require(s.step > 0, ErrorCode::invalid_argument, "mask_ratio_schedule: step must be positive");
    const int k = epoch / s.step;
    const double r = static_cast<double>(k) * s.increment;
    return std::min(r, s.cap);
}

void TrainConfig::validate() const {
    require(epochs >= 1, ErrorCode::config, "epochs must be at least 1");
    require(batch_size >= 1, ErrorCode::config, "batch_size must be at least 1");
    require(learning_rate > 0.0, ErrorCode::config, "learning_rate must be positive");
    require(w_kl >= 0.0, ErrorCode::config, "w_kl must be non-negative");
    require(checkpoint_every >= 1, ErrorCode::config, "checkpoint_every must be at least 1");
    require(schedule.step >= 1, ErrorCode::config, "schedule step must be at least 1");
    require(schedule.increment > 0.0, ErrorCode::config, "schedule increment must be positive");
    require(schedule.cap >= 0.0 && schedule.cap <= 1.0, ErrorCode::config, "schedule cap must lie in [0, 1]");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"w_kl", c.w_kl},
            {"seed", c.seed},
            {"curriculum_enabled", c.curriculum_enabled},
            {"checkpoint_every", c.checkpoint_every},
            {"schedule", {{"step", c.schedule.step}, {"increment", c.schedule.increment}, {"cap", c.schedule.cap}}}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    try {
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.w_kl = j.value("w_kl", c.w_kl);
        c.seed = j.value("seed", c.seed);
        c.curriculum_enabled = j.value("curriculum_enabled", c.curriculum_enabled);
        c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
        if (j.contains("schedule")) {
            const auto& s = j["schedule"];
            c.schedule.step = s.value("step", c.schedule.step);
            c.schedule.increment = s.value("increment", c.schedule.increment);
            c.schedule.cap = s.value("cap", c.schedule.cap);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("train config: ") + e.what());
    }
    return c;
}

int mask_count(int frames, double ratio) {
    require(ratio >= 0.0 && ratio <= 1.0, ErrorCode::invalid_argument, "mask ratio must lie in [0, 1]");
    return std::clamp(static_cast<int>(std::floor(ratio * frames + 1e-9)), 0, frames);
}

std::vector<int> sample_mask_indices(int frames, double ratio, std::uint64_t seed) {
    const int n = mask_count(frames, ratio);
    std::vector<int> order(frames);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    // Partial Fisher-Yates: the first n slots are a uniform n-subset.
    for (int i = 0; i < n; ++i) {
        const int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(frames - i)));
        std::swap(order[i], order[j]);
    }
    std::vector<int> picked(order.begin(), order.begin() + n);
    std::sort(picked.begin(), picked.end());
    return picked;
}

MaskedMotion apply_mask(const Motion& motion, double ratio, std::uint64_t seed) {
    return MaskedMotion{motion, sample_mask_indices(motion.frame_count(), ratio, seed)};
}

std::string log_header() { return "epoch,mask_ratio,rec_loss,kl_loss,total_loss"; }

std::string format_log_row(const LogRow& row) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g", row.epoch, row.mask_ratio, row.rec_loss,
                  row.kl_loss, row.total_loss);
    return buf;
}

namespace {

void check_finite(double v, int epoch, int batch, const char* term) {
    require(std::isfinite(v), ErrorCode::numerical,
            "non-finite " + std::string(term) + " loss at epoch " + std::to_string(epoch) + ", batch " +
                std::to_string(batch));
}

constexpr std::uint64_t kOrderStream = 0x6f72646572;
constexpr std::uint64_t kMaskStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kDropoutStream = 3;

}  // namespace

TrainResult train(CvaeModel& model, const std::vector<TrainingSample>& samples, const TrainConfig& config,
                  const TrainOutputs& outputs, const StepProbe* probe) {
    config.validate();
    require(model.ready(), ErrorCode::state, "train: model has no weights");
    require(!samples.empty(), ErrorCode::config, "train: no training samples");

    std::vector<Matrix> frames;
    std::vector<Matrix> conds;
    for (const auto& s : samples) {
        frames.push_back(model.model_frames(s.motion));
        conds.push_back(model.condition_row(s.condition));
    }

    nn::ParameterSet& params = model.parameters();
    nn::Adam adam(params, nn::AdamConfig{config.learning_rate});
    const int d_latent = model.config().d_latent;
    const int n = static_cast<int>(samples.size());
    Rng order_rng(mix_seed(config.seed, kOrderStream));

    std::ofstream log_file;
    if (!outputs.dir.empty()) {
        std::filesystem::create_directories(outputs.dir / "checkpoints");
        log_file.open(outputs.dir / "train_log.csv", std::ios::trunc);
        require(static_cast<bool>(log_file), ErrorCode::io, "cannot write training log");
        log_file << log_header() << "\n";
    }
    auto write_checkpoint = [&](int epoch, const std::filesystem::path& path) {
        CheckpointState st;
        st.epoch = epoch;
        st.rng_state = order_rng.state();
        st.train_config = to_json(config);
        st.metadata = outputs.metadata;
        st.optimizer = adam;
        save_checkpoint(path, model, st);
    };

    TrainResult result;
    std::vector<int> order(n);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double ratio = config.curriculum_enabled ? mask_ratio_schedule(epoch, config.schedule) : 0.0;
        std::iota(order.begin(), order.end(), 0);
        for (int i = n; i > 1; --i) std::swap(order[i - 1], order[order_rng.uniform_index(static_cast<std::uint64_t>(i))]);

        LogRow row;
        row.epoch = epoch;
        row.mask_ratio = ratio;
        int batch_index = 0;
        for (int start = 0; start < n; start += config.batch_size, ++batch_index) {
            const int end = std::min(n, start + config.batch_size);
            nn::Gradients batch_grads = params.zeros_like();
            for (int k = start; k < end; ++k) {
                const int idx = order[k];
                MaskPlan plan;
                plan.epoch = epoch;
                plan.ratio = ratio;
                plan.indices = sample_mask_indices(static_cast<int>(frames[idx].rows()), ratio,
                                                   mix_seed(config.seed, epoch, idx, kMaskStream));
                if (probe && probe->on_sample) probe->on_sample(plan, frames[idx]);

                Rng dropout_rng(mix_seed(config.seed, epoch, idx, kDropoutStream));
                nn::ForwardContext ctx{true, model.config().dropout, &dropout_rng};
                Graph g(params);
                const auto post = model.encode_graph(g, frames[idx], conds[idx], plan.indices, ctx);
                Rng noise_rng(mix_seed(config.seed, epoch, idx, kNoiseStream));
                Matrix eps(1, d_latent);
                for (int d = 0; d < d_latent; ++d) eps(0, d) = noise_rng.normal();
                const Var z = g.add(post.mu, g.mul(g.exp(g.scale(post.log_var, 0.5)), g.constant(eps)));
                const Var pred = model.decode_graph(g, z, conds[idx], static_cast<int>(frames[idx].rows()), ctx);
                const Var rec = reconstruction_loss(g, pred, frames[idx]);
                const Var kl = kl_loss(g, post.mu, post.log_var);
                const Var total = g.add(rec, g.scale(kl, config.w_kl));

                const double rec_v = g.value(rec)(0, 0);
                const double kl_v = g.value(kl)(0, 0);
                check_finite(rec_v, epoch, batch_index, "reconstruction");
                check_finite(kl_v, epoch, batch_index, "KL");
                row.rec_loss += rec_v;
                row.kl_loss += kl_v;
                row.total_loss += g.value(total)(0, 0);

                nn::Gradients grads = params.zeros_like();
                g.backward(total, grads);
                nn::accumulate(batch_grads, grads, 1.0 / (end - start));
            }
            adam.step(params, batch_grads);
        }
        row.rec_loss /= n;
        row.kl_loss /= n;
        row.total_loss /= n;
        result.log.push_back(row);
        result.epochs_run = epoch + 1;

        if (log_file.is_open()) log_file << format_log_row(row) << "\n" << std::flush;
        if (!outputs.dir.empty() && (epoch + 1) % config.checkpoint_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "epoch_%05d.ckpt", epoch + 1);
            write_checkpoint(epoch + 1, outputs.dir / "checkpoints" / name);
        }
    }
    if (!outputs.dir.empty()) write_checkpoint(config.epochs, outputs.dir / "checkpoint.ckpt");
    return result;
}

}  // namespace signmotion
