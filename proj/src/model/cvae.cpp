#include "signmotion/model/cvae.hpp"

#include <algorithm>
#include <cmath>

#include "signmotion/common/error.hpp"
#include "signmotion/common/rng.hpp"

namespace signmotion {

using nn::Graph;
using nn::Matrix;
using nn::Var;

void ModelConfig::validate() const {
    require(d_latent > 0 && d_model > 0 && n_heads > 0 && n_enc_layers > 0 && n_dec_layers > 0 && d_ff > 0 &&
                pose_dim > 0 && d_emb > 0,
            ErrorCode::config, "model dimensions must be positive");
    require(d_model % n_heads == 0, ErrorCode::config, "d_model must be divisible by n_heads");
    require(max_T >= 1, ErrorCode::config, "max_T must be at least 1");
    require(dropout >= 0.0 && dropout < 1.0, ErrorCode::config, "dropout must lie in [0, 1)");
    const JointLayout& l = layout_by_name(layout);
    require(l.size() * channel_width(channels) == pose_dim, ErrorCode::config,
            "pose_dim " + std::to_string(pose_dim) + " does not match layout '" + layout + "' in " +
                std::string(to_string(channels)));
}

nlohmann::json to_json(const ModelConfig& c) {
    return {{"d_latent", c.d_latent},
            {"d_model", c.d_model},
            {"n_heads", c.n_heads},
            {"n_enc_layers", c.n_enc_layers},
            {"n_dec_layers", c.n_dec_layers},
            {"d_ff", c.d_ff},
            {"dropout", c.dropout},
            {"max_T", c.max_T},
            {"pose_dim", c.pose_dim},
            {"d_emb", c.d_emb},
            {"layout", c.layout},
            {"channels", std::string(to_string(c.channels))}};
}

ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c) {
    try {
        c.d_latent = j.value("d_latent", c.d_latent);
        c.d_model = j.value("d_model", c.d_model);
        c.n_heads = j.value("n_heads", c.n_heads);
        c.n_enc_layers = j.value("n_enc_layers", c.n_enc_layers);
        c.n_dec_layers = j.value("n_dec_layers", c.n_dec_layers);
        c.d_ff = j.value("d_ff", c.d_ff);
        c.dropout = j.value("dropout", c.dropout);
        c.max_T = j.value("max_T", c.max_T);
        c.pose_dim = j.value("pose_dim", c.pose_dim);
        c.d_emb = j.value("d_emb", c.d_emb);
        c.layout = j.value("layout", c.layout);
        if (j.contains("channels")) c.channels = channels_from_string(j["channels"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, std::string("model config: ") + e.what());
    }
    return c;
}

LatentSample reparameterize(const LatentDistribution& dist, std::uint64_t seed) {
    require(dist.mu.size() == dist.log_var.size(), ErrorCode::shape, "reparameterize: mu/log_var size mismatch");
    Rng rng(seed);
    LatentSample s;
    s.seed = seed;
    s.z.resize(dist.mu.size());
    for (Eigen::Index i = 0; i < dist.mu.size(); ++i) {
        const double lv = std::clamp(dist.log_var[i], kLogVarMin, kLogVarMax);
        s.z[i] = dist.mu[i] + std::exp(0.5 * lv) * rng.normal();
    }
    return s;
}

double reconstruction_loss(const Matrix& target, const Matrix& prediction) {
    require(target.rows() == prediction.rows() && target.cols() == prediction.cols(), ErrorCode::shape,
            "reconstruction_loss: motions differ in shape");
    return (target - prediction).squaredNorm() / static_cast<double>(target.rows());
}

double reconstruction_loss(const Motion& target, const Motion& prediction) {
    require(target.frame_count() == prediction.frame_count() && target.frame_width() == prediction.frame_width(),
            ErrorCode::shape, "reconstruction_loss: motions differ in shape");
    return reconstruction_loss(Matrix(target.frames().cast<double>()), Matrix(prediction.frames().cast<double>()));
}

double kl_loss(const LatentDistribution& dist) {
    require(dist.mu.size() == dist.log_var.size(), ErrorCode::shape, "kl_loss: mu/log_var size mismatch");
    double s = 0.0;
    for (Eigen::Index i = 0; i < dist.mu.size(); ++i) {
        const double lv = dist.log_var[i];
        s += std::exp(lv) + dist.mu[i] * dist.mu[i] - 1.0 - lv;
    }
    return 0.5 * s;
}

double cvae_loss(const Motion& target, const Motion& prediction, const LatentDistribution& dist, double w_kl) {
    require(w_kl >= 0.0, ErrorCode::invalid_argument, "cvae_loss: w_kl must be non-negative");
    return reconstruction_loss(target, prediction) + w_kl * kl_loss(dist);
}

Var reconstruction_loss(Graph& g, Var prediction, const Matrix& target) {
    const Matrix& p = g.value(prediction);
    require(p.rows() == target.rows() && p.cols() == target.cols(), ErrorCode::shape,
            "reconstruction_loss: motions differ in shape");
    return g.scale(g.sum_squares(g.sub(prediction, g.constant(target))), 1.0 / static_cast<double>(target.rows()));
}

Var kl_loss(Graph& g, Var mu, Var log_var) {
    const double d = static_cast<double>(g.value(mu).size());
    const Var terms = g.sub(g.add_scalar(g.add(g.sum(g.exp(log_var)), g.sum_squares(mu)), -d), g.sum(log_var));
    return g.scale(terms, 0.5);
}

CvaeModel::CvaeModel(const ModelConfig& config, std::uint64_t init_seed) : config_(config), ready_(true) {
    config_.validate();
    Rng rng(init_seed);
    const int dm = config_.d_model;
    positions_ = nn::sinusoidal_encoding(config_.max_T + 3, dm);

    input_proj_ = nn::Linear::create(params_, "encoder.input_proj", config_.pose_dim, dm, rng);
    mask_token_ = params_.add("encoder.mask_token", nn::normal_matrix(1, dm, 1.0, rng));
    mu_token_ = params_.add("encoder.mu_token", nn::normal_matrix(1, dm, 1.0, rng));
    sigma_token_ = params_.add("encoder.sigma_token", nn::normal_matrix(1, dm, 1.0, rng));
    enc_condition_ = nn::Mlp3::create(params_, "encoder.condition", config_.d_emb, dm, dm, rng);
    for (int i = 0; i < config_.n_enc_layers; ++i)
        encoder_.push_back(nn::EncoderLayer::create(params_, "encoder.layer" + std::to_string(i), dm,
                                                    config_.n_heads, config_.d_ff, rng));
    mu_head_ = nn::Linear::create(params_, "encoder.mu_head", dm, config_.d_latent, rng);
    log_var_head_ = nn::Linear::create(params_, "encoder.log_var_head", dm, config_.d_latent, rng);

    dec_condition_ = nn::Mlp3::create(params_, "decoder.condition", config_.d_emb, dm, config_.d_latent, rng);
    latent_proj_ = nn::Linear::create(params_, "decoder.latent_proj", config_.d_latent, dm, rng);
    for (int i = 0; i < config_.n_dec_layers; ++i)
        decoder_.push_back(nn::DecoderLayer::create(params_, "decoder.layer" + std::to_string(i), dm,
                                                    config_.n_heads, config_.d_ff, rng));
    output_proj_ = nn::Linear::create(params_, "decoder.output_proj", dm, config_.pose_dim, rng);
}

const JointLayout& CvaeModel::layout() const {
    require_ready();
    return layout_by_name(config_.layout);
}

void CvaeModel::require_ready() const {
    require(ready_, ErrorCode::state, "no trained checkpoint is loaded");
}

void CvaeModel::check_length(int frames) const {
    require(frames >= 1 && frames <= config_.max_T, ErrorCode::sequence_length,
            "sequence length " + std::to_string(frames) + " outside [1, " + std::to_string(config_.max_T) + "]");
}

void CvaeModel::check_condition(const Matrix& cond) const {
    require(cond.rows() == 1 && cond.cols() == config_.d_emb, ErrorCode::shape,
            "condition has dimension " + std::to_string(cond.cols()) + ", expected " + std::to_string(config_.d_emb));
}

Matrix CvaeModel::model_frames(const Motion& motion) const {
    require_ready();
    require(motion.layout().name() == config_.layout, ErrorCode::shape,
            "motion layout '" + motion.layout().name() + "' differs from model layout '" + config_.layout + "'");
    check_length(motion.frame_count());
    const Motion m = convert_channels(motion, config_.channels);
    require(m.frame_width() == config_.pose_dim, ErrorCode::shape, "motion pose dimension mismatch");
    return m.frames().cast<double>();
}

Matrix CvaeModel::condition_row(const SemanticEmbedding& cond) const {
    Matrix row(1, static_cast<Eigen::Index>(cond.vector.size()));
    for (std::size_t i = 0; i < cond.vector.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = cond.vector[i];
    check_condition(row);
    return row;
}

CvaeModel::Posterior CvaeModel::encode_graph(Graph& g, const Matrix& frames, const Matrix& cond,
                                             std::span<const int> masked_frames,
                                             const nn::ForwardContext& ctx) const {
    require_ready();
    check_length(static_cast<int>(frames.rows()));
    require(frames.cols() == config_.pose_dim, ErrorCode::shape, "encode: pose dimension mismatch");
    check_condition(cond);
    const int T = static_cast<int>(frames.rows());

    Var x = input_proj_.forward(g, g.constant(frames));
    if (!masked_frames.empty()) x = g.replace_rows(x, masked_frames, g.param(mask_token_));
    const Var c = enc_condition_.forward(g, g.constant(cond));
    const Var parts[] = {g.param(mu_token_), g.param(sigma_token_), c, x};
    Var h = g.add(g.concat_rows(parts), g.constant(positions_.topRows(T + 3)));
    h = nn::maybe_dropout(g, h, ctx);
    for (const auto& layer : encoder_) h = layer.forward(g, h, ctx);

    Posterior p;
    p.mu = mu_head_.forward(g, g.slice_rows(h, 0, 1));
    p.log_var = g.clamp(log_var_head_.forward(g, g.slice_rows(h, 1, 1)), kLogVarMin, kLogVarMax);
    return p;
}

Var CvaeModel::decode_graph(Graph& g, Var z, const Matrix& cond, int frames, const nn::ForwardContext& ctx) const {
    require_ready();
    check_length(frames);
    check_condition(cond);
    require(g.value(z).rows() == 1 && g.value(z).cols() == config_.d_latent, ErrorCode::shape,
            "decode: latent dimension mismatch");
    const Var biased = g.add(z, dec_condition_.forward(g, g.constant(cond)));
    const Var memory = g.repeat_rows(latent_proj_.forward(g, biased), frames);
    Var h = nn::maybe_dropout(g, g.constant(positions_.topRows(frames)), ctx);
    for (const auto& layer : decoder_) h = layer.forward(g, h, memory, ctx);
    return output_proj_.forward(g, h);
}

LatentDistribution CvaeModel::encode(const Motion& motion, const SemanticEmbedding& cond) const {
    const Matrix frames = model_frames(motion);
    Graph g(params_);
    const Posterior p = encode_graph(g, frames, condition_row(cond), {}, {});
    LatentDistribution d;
    d.mu = g.value(p.mu).row(0).transpose();
    d.log_var = g.value(p.log_var).row(0).transpose();
    return d;
}

Motion CvaeModel::to_motion(const Matrix& frames, const SemanticEmbedding& cond, double fps) const {
    std::optional<std::string> gloss;
    if (cond.modality == Modality::text) gloss = cond.key;
    return Motion(layout(), config_.channels, frames.cast<float>(), fps, gloss);
}

Motion CvaeModel::decode(const LatentSample& z, const SemanticEmbedding& cond, int frames, double fps) const {
    require_ready();
    require(z.z.size() == config_.d_latent, ErrorCode::shape, "decode: latent dimension mismatch");
    Graph g(params_);
    const Var out = decode_graph(g, g.constant(z.z.transpose()), condition_row(cond), frames, {});
    return to_motion(g.value(out), cond, fps);
}

std::vector<Motion> CvaeModel::decode_batch(std::span<const LatentSample> z, std::span<const SemanticEmbedding> cond,
                                            std::span<const int> frames, double fps) const {
    require(z.size() == cond.size() && z.size() == frames.size(), ErrorCode::shape,
            "decode_batch: batch members disagree in count");
    std::vector<Motion> out;
    out.reserve(z.size());
    // Each item is decoded over its own length; this is the padded batch with
    // its padding rows excluded from attention.
    for (std::size_t i = 0; i < z.size(); ++i) out.push_back(decode(z[i], cond[i], frames[i], fps));
    return out;
}

Motion CvaeModel::generate(const SemanticEmbedding& cond, int frames, std::uint64_t seed, double fps) const {
    require_ready();
    LatentDistribution prior;
    prior.mu = Eigen::VectorXd::Zero(config_.d_latent);
    prior.log_var = Eigen::VectorXd::Zero(config_.d_latent);
    return decode(reparameterize(prior, seed), cond, frames, fps);
}

Motion CvaeModel::reconstruct(const Motion& motion, const SemanticEmbedding& cond, std::uint64_t seed) const {
    const LatentDistribution d = encode(motion, cond);
    Motion out = decode(reparameterize(d, seed), cond, motion.frame_count(), motion.fps());
    if (motion.gloss()) out.set_gloss(motion.gloss());
    return out;
}

}  // namespace signmotion
