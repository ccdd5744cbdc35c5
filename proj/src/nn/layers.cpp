#include "signmotion/nn/layers.hpp"

#include <cmath>
#include <vector>

#include "signmotion/common/error.hpp"

namespace signmotion::nn {

Var maybe_dropout(Graph& g, Var x, const ForwardContext& ctx) {
    return ctx.active() ? g.dropout(x, ctx.dropout, *ctx.rng) : x;
}

Matrix xavier_uniform(int rows, int cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
    return m;
}

Matrix normal_matrix(int rows, int cols, double stddev, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.normal();
    return m;
}

Linear Linear::create(ParameterSet& params, const std::string& name, int in, int out, Rng& rng) {
    Linear l;
    l.in = in;
    l.out = out;
    l.weight = params.add(name + ".weight", xavier_uniform(in, out, rng));
    l.bias = params.add(name + ".bias", Matrix::Zero(1, out));
    return l;
}

Var Linear::forward(Graph& g, Var x) const {
    return g.add_row(g.matmul(x, g.param(weight)), g.param(bias));
}

LayerNorm LayerNorm::create(ParameterSet& params, const std::string& name, int width) {
    LayerNorm n;
    n.gamma = params.add(name + ".gamma", Matrix::Ones(1, width));
    n.beta = params.add(name + ".beta", Matrix::Zero(1, width));
    return n;
}

Var LayerNorm::forward(Graph& g, Var x) const {
    return g.layer_norm_rows(x, g.param(gamma), g.param(beta));
}

Mlp3 Mlp3::create(ParameterSet& params, const std::string& name, int in, int hidden, int out, Rng& rng) {
    Mlp3 m;
    m.l1 = Linear::create(params, name + ".0", in, hidden, rng);
    m.l2 = Linear::create(params, name + ".1", hidden, hidden, rng);
    m.l3 = Linear::create(params, name + ".2", hidden, out, rng);
    return m;
}

Var Mlp3::forward(Graph& g, Var x) const {
    return l3.forward(g, g.gelu(l2.forward(g, g.gelu(l1.forward(g, x)))));
}

MultiHeadAttention MultiHeadAttention::create(ParameterSet& params, const std::string& name, int width, int heads,
                                              Rng& rng) {
    require(heads > 0 && width % heads == 0, ErrorCode::config, "attention width must be divisible by heads");
    MultiHeadAttention a;
    a.heads = heads;
    a.q = Linear::create(params, name + ".q", width, width, rng);
    a.k = Linear::create(params, name + ".k", width, width, rng);
    a.v = Linear::create(params, name + ".v", width, width, rng);
    a.o = Linear::create(params, name + ".o", width, width, rng);
    return a;
}

Var MultiHeadAttention::forward(Graph& g, Var query, Var memory, const ForwardContext& ctx) const {
    const Var q_all = q.forward(g, query);
    const Var k_all = k.forward(g, memory);
    const Var v_all = v.forward(g, memory);
    const int width = q.out;
    const int head_dim = width / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
    std::vector<Var> outputs;
    outputs.reserve(heads);
    for (int h = 0; h < heads; ++h) {
        const Var qh = g.slice_cols(q_all, h * head_dim, head_dim);
        const Var kh = g.slice_cols(k_all, h * head_dim, head_dim);
        const Var vh = g.slice_cols(v_all, h * head_dim, head_dim);
        Var attn = g.softmax_rows(g.scale(g.matmul_nt(qh, kh), inv_sqrt));
        attn = maybe_dropout(g, attn, ctx);
        outputs.push_back(g.matmul(attn, vh));
    }
    const Var merged = heads == 1 ? outputs[0] : g.concat_cols(outputs);
    return o.forward(g, merged);
}

EncoderLayer EncoderLayer::create(ParameterSet& params, const std::string& name, int width, int heads, int ff,
                                  Rng& rng) {
    EncoderLayer l;
    l.self_attn = MultiHeadAttention::create(params, name + ".self_attn", width, heads, rng);
    l.norm1 = LayerNorm::create(params, name + ".norm1", width);
    l.ff1 = Linear::create(params, name + ".ff1", width, ff, rng);
    l.ff2 = Linear::create(params, name + ".ff2", ff, width, rng);
    l.norm2 = LayerNorm::create(params, name + ".norm2", width);
    return l;
}

Var EncoderLayer::forward(Graph& g, Var x, const ForwardContext& ctx) const {
    Var h = norm1.forward(g, g.add(x, maybe_dropout(g, self_attn.forward(g, x, x, ctx), ctx)));
    const Var ff = ff2.forward(g, maybe_dropout(g, g.gelu(ff1.forward(g, h)), ctx));
    return norm2.forward(g, g.add(h, maybe_dropout(g, ff, ctx)));
}

DecoderLayer DecoderLayer::create(ParameterSet& params, const std::string& name, int width, int heads, int ff,
                                  Rng& rng) {
    DecoderLayer l;
    l.self_attn = MultiHeadAttention::create(params, name + ".self_attn", width, heads, rng);
    l.norm1 = LayerNorm::create(params, name + ".norm1", width);
    l.cross_attn = MultiHeadAttention::create(params, name + ".cross_attn", width, heads, rng);
    l.norm2 = LayerNorm::create(params, name + ".norm2", width);
    l.ff1 = Linear::create(params, name + ".ff1", width, ff, rng);
    l.ff2 = Linear::create(params, name + ".ff2", ff, width, rng);
    l.norm3 = LayerNorm::create(params, name + ".norm3", width);
    return l;
}

Var DecoderLayer::forward(Graph& g, Var x, Var memory, const ForwardContext& ctx) const {
    Var h = norm1.forward(g, g.add(x, maybe_dropout(g, self_attn.forward(g, x, x, ctx), ctx)));
    h = norm2.forward(g, g.add(h, maybe_dropout(g, cross_attn.forward(g, h, memory, ctx), ctx)));
    const Var ff = ff2.forward(g, maybe_dropout(g, g.gelu(ff1.forward(g, h)), ctx));
    return norm3.forward(g, g.add(h, maybe_dropout(g, ff, ctx)));
}

Matrix sinusoidal_encoding(int positions, int width) {
    Matrix pe(positions, width);
    for (int p = 0; p < positions; ++p) {
        for (int i = 0; i < width; i += 2) {
            const double freq = std::pow(10000.0, -static_cast<double>(i) / width);
            pe(p, i) = std::sin(p * freq);
            if (i + 1 < width) pe(p, i + 1) = std::cos(p * freq);
        }
    }
    return pe;
}

}  // namespace signmotion::nn
