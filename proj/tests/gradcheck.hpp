#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "signmotion/common/rng.hpp"
#include "signmotion/model/cvae.hpp"
#include "signmotion/motion/joint_layout.hpp"

namespace testutil {

struct BlockError {
    std::string name;
    double relative_error = 0.0;
    double analytic_norm = 0.0;
    double numeric_norm = 0.0;
};

struct GradCheckResult {
    std::vector<BlockError> blocks;
    double worst = 0.0;
};

// d_model 16, one encoder and one decoder layer, T = 4, over a three-joint
// layout so that every parameter can be perturbed individually.
inline signmotion::ModelConfig tiny_config() {
    using namespace signmotion;
    static const bool registered = [] {
        register_layout(JointLayout("grad_tiny3", {"root", "arm", "hand"}, {-1, 0, 1}));
        return true;
    }();
    (void)registered;
    ModelConfig c;
    c.d_latent = 4;
    c.d_model = 16;
    c.n_heads = 2;
    c.n_enc_layers = 1;
    c.n_dec_layers = 1;
    c.d_ff = 24;
    c.dropout = 0.0;
    c.max_T = 8;
    c.layout = "grad_tiny3";
    c.channels = Channels::sixd;
    c.pose_dim = 18;
    c.d_emb = 6;
    return c;
}

// Compares reverse-mode gradients of rec + w_kl * KL with central differences
// (step 1e-4) on a fixed masked input and fixed reparameterization noise.
inline GradCheckResult gradient_check(double w_kl = 0.1, double step = 1e-4) {
    using namespace signmotion;
    const ModelConfig cfg = tiny_config();
    CvaeModel model(cfg, 123);
    Rng rng(77);
    nn::Matrix frames(4, cfg.pose_dim), cond(1, cfg.d_emb), eps(1, cfg.d_latent);
    for (Eigen::Index i = 0; i < frames.size(); ++i) frames.data()[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < cond.size(); ++i) cond.data()[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps.data()[i] = rng.normal();
    const std::vector<int> masked = {1, 3};

    auto build = [&](nn::Graph& g) {
        const nn::ForwardContext ctx;
        const auto post = model.encode_graph(g, frames, cond, masked, ctx);
        const nn::Var z = g.add(post.mu, g.mul(g.exp(g.scale(post.log_var, 0.5)), g.constant(eps)));
        const nn::Var pred = model.decode_graph(g, z, cond, 4, ctx);
        return g.add(reconstruction_loss(g, pred, frames), g.scale(kl_loss(g, post.mu, post.log_var), w_kl));
    };
    auto loss_value = [&] {
        nn::Graph g(model.parameters());
        return g.value(build(g))(0, 0);
    };

    nn::ParameterSet& params = model.parameters();
    nn::Gradients analytic = params.zeros_like();
    {
        nn::Graph g(params);
        g.backward(build(g), analytic);
    }

    GradCheckResult result;
    for (int p = 0; p < params.size(); ++p) {
        nn::Matrix numeric = nn::Matrix::Zero(params.value(p).rows(), params.value(p).cols());
        for (Eigen::Index k = 0; k < numeric.size(); ++k) {
            double& w = params.value(p).data()[k];
            const double saved = w;
            w = saved + step;
            const double up = loss_value();
            w = saved - step;
            const double down = loss_value();
            w = saved;
            numeric.data()[k] = (up - down) / (2.0 * step);
        }
        // Key biases shift every score of a query equally, so their exact gradient
        // is zero and the finite difference is pure roundoff (~1e-10).
        const double scale = std::max({analytic[p].norm(), numeric.norm(), 1e-6});
        const double rel = (analytic[p] - numeric).norm() / scale;
        result.blocks.push_back({params.name(p), rel, analytic[p].norm(), numeric.norm()});
        result.worst = std::max(result.worst, rel);
    }
    return result;
}

}  // namespace testutil
