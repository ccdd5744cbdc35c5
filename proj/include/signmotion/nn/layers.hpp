#pragma once

#include <string>

#include "signmotion/nn/graph.hpp"

namespace signmotion::nn {

// Dropout source for one forward pass; inference passes a null rng.
struct ForwardContext {
    bool training = false;
    double dropout = 0.0;
    Rng* rng = nullptr;

    bool active() const { return training && dropout > 0.0 && rng != nullptr; }
};

Var maybe_dropout(Graph& g, Var x, const ForwardContext& ctx);

struct Linear {
    int weight = -1;  // in x out
    int bias = -1;    // 1 x out
    int in = 0;
    int out = 0;

    static Linear create(ParameterSet& params, const std::string& name, int in, int out, Rng& rng);
    Var forward(Graph& g, Var x) const;
};

struct LayerNorm {
    int gamma = -1;
    int beta = -1;

    static LayerNorm create(ParameterSet& params, const std::string& name, int width);
    Var forward(Graph& g, Var x) const;
};

// Three linear maps with GELU between them.
struct Mlp3 {
    Linear l1, l2, l3;

    static Mlp3 create(ParameterSet& params, const std::string& name, int in, int hidden, int out, Rng& rng);
    Var forward(Graph& g, Var x) const;
};

struct MultiHeadAttention {
    Linear q, k, v, o;
    int heads = 1;

    static MultiHeadAttention create(ParameterSet& params, const std::string& name, int width, int heads, Rng& rng);
    Var forward(Graph& g, Var query, Var memory, const ForwardContext& ctx) const;
};

// Post-norm transformer blocks with GELU feed-forward.
struct EncoderLayer {
    MultiHeadAttention self_attn;
    LayerNorm norm1, norm2;
    Linear ff1, ff2;

    static EncoderLayer create(ParameterSet& params, const std::string& name, int width, int heads, int ff, Rng& rng);
    Var forward(Graph& g, Var x, const ForwardContext& ctx) const;
};

struct DecoderLayer {
    MultiHeadAttention self_attn, cross_attn;
    LayerNorm norm1, norm2, norm3;
    Linear ff1, ff2;

    static DecoderLayer create(ParameterSet& params, const std::string& name, int width, int heads, int ff, Rng& rng);
    Var forward(Graph& g, Var x, Var memory, const ForwardContext& ctx) const;
};

// Standard sinusoidal table: rows are positions.
Matrix sinusoidal_encoding(int positions, int width);

Matrix xavier_uniform(int rows, int cols, Rng& rng);
Matrix normal_matrix(int rows, int cols, double stddev, Rng& rng);

}  // namespace signmotion::nn
