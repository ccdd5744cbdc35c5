#pragma once

#include <cstdint>
#include <json.hpp>
#include <span>
#include <vector>

#include "signmotion/motion/motion.hpp"
#include "signmotion/nn/layers.hpp"
#include "signmotion/semantic/embedding.hpp"

namespace signmotion {

struct ModelConfig {
    int d_latent = 256;
    int d_model = 256;
    int n_heads = 4;
    int n_enc_layers = 4;
    int n_dec_layers = 4;
    int d_ff = 1024;
    double dropout = 0.1;
    int max_T = 120;
    int pose_dim = 312;
    int d_emb = 512;
    std::string layout = "smplx_upper52";
    Channels channels = Channels::sixd;

    void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
// Unspecified keys keep the values of `base`.
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

inline constexpr double kLogVarMin = -30.0;
inline constexpr double kLogVarMax = 20.0;

// Diagonal Gaussian; log_var is held within [kLogVarMin, kLogVarMax].
struct LatentDistribution {
    Eigen::VectorXd mu;
    Eigen::VectorXd log_var;
};

struct LatentSample {
    Eigen::VectorXd z;
    std::uint64_t seed = 0;
};

// z = mu + exp(log_var / 2) * eps, eps ~ N(0, I) from Rng(seed).
LatentSample reparameterize(const LatentDistribution& dist, std::uint64_t seed);

// Mean over frames of the per-frame squared L2 error.
double reconstruction_loss(const Motion& target, const Motion& prediction);
double reconstruction_loss(const nn::Matrix& target, const nn::Matrix& prediction);
// KL(N(mu, diag(exp(log_var))) || N(0, I)).
double kl_loss(const LatentDistribution& dist);
double cvae_loss(const Motion& target, const Motion& prediction, const LatentDistribution& dist, double w_kl);

// Graph forms of the same objectives.
nn::Var reconstruction_loss(nn::Graph& g, nn::Var prediction, const nn::Matrix& target);
nn::Var kl_loss(nn::Graph& g, nn::Var mu, nn::Var log_var);

// Transformer conditional VAE over pose sequences.
//
// Encoder input rows: [mu token, sigma token, projected condition, frame
// tokens...] with sinusoidal positions added over the whole sequence; the
// outputs at the two distribution tokens give (mu, log_var).  The decoder adds
// a condition bias to z, repeats it T times as attention memory, and lets T
// sinusoidal position queries attend to it, emitting all frames at once.
class CvaeModel {
public:
    CvaeModel() = default;  // no weights; inference calls raise a state error
    CvaeModel(const ModelConfig& config, std::uint64_t init_seed);

    bool ready() const { return ready_; }
    const ModelConfig& config() const { return config_; }
    const nn::ParameterSet& parameters() const { return params_; }
    nn::ParameterSet& parameters() { return params_; }
    const JointLayout& layout() const;

    struct Posterior {
        nn::Var mu;
        nn::Var log_var;
    };

    // Frames as a model-channel matrix after validating layout and length.
    nn::Matrix model_frames(const Motion& motion) const;
    nn::Matrix condition_row(const SemanticEmbedding& cond) const;

    Posterior encode_graph(nn::Graph& g, const nn::Matrix& frames, const nn::Matrix& cond,
                           std::span<const int> masked_frames, const nn::ForwardContext& ctx) const;
    nn::Var decode_graph(nn::Graph& g, nn::Var z, const nn::Matrix& cond, int frames,
                         const nn::ForwardContext& ctx) const;

    LatentDistribution encode(const Motion& motion, const SemanticEmbedding& cond) const;
    Motion decode(const LatentSample& z, const SemanticEmbedding& cond, int frames, double fps = 30.0) const;
    std::vector<Motion> decode_batch(std::span<const LatentSample> z, std::span<const SemanticEmbedding> cond,
                                     std::span<const int> frames, double fps = 30.0) const;
    Motion generate(const SemanticEmbedding& cond, int frames, std::uint64_t seed, double fps = 30.0) const;
    Motion reconstruct(const Motion& motion, const SemanticEmbedding& cond, std::uint64_t seed) const;

private:
    void require_ready() const;
    void check_length(int frames) const;
    void check_condition(const nn::Matrix& cond) const;
    Motion to_motion(const nn::Matrix& frames, const SemanticEmbedding& cond, double fps) const;

    ModelConfig config_;
    bool ready_ = false;
    nn::ParameterSet params_;
    nn::Matrix positions_;

    nn::Linear input_proj_;
    int mask_token_ = -1;
    int mu_token_ = -1;
    int sigma_token_ = -1;
    nn::Mlp3 enc_condition_;
    std::vector<nn::EncoderLayer> encoder_;
    nn::Linear mu_head_, log_var_head_;

    nn::Mlp3 dec_condition_;
    nn::Linear latent_proj_;
    std::vector<nn::DecoderLayer> decoder_;
    nn::Linear output_proj_;
};

}  // namespace signmotion
