#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "signmotion/common/rng.hpp"
#include "signmotion/nn/tensor.hpp"

namespace signmotion::nn {

struct Var {
    int id = -1;
};

// Sparse row-mixing operator over joints: out[j] = sum_k w * in[k].
struct JointMixer {
    std::vector<std::vector<std::pair<int, double>>> neighbors;
    int joints() const { return static_cast<int>(neighbors.size()); }
};

// Reverse-mode tape over row-major matrices.  One graph per forward pass;
// parameters are read through the ParameterSet and their gradients land in a
// caller-owned Gradients buffer, so a single ParameterSet can back many
// graphs at once.
class Graph {
public:
    explicit Graph(const ParameterSet& params) : params_(&params) {}

    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    Var param(int index);
    Var constant(Matrix value);
    const Matrix& value(Var v) const;

    Var matmul(Var a, Var b);
    Var matmul_nt(Var a, Var b);  // a * b^T
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var add_row(Var a, Var row);  // broadcast a 1 x n row over every row of a
    Var scale(Var a, double s);
    Var add_scalar(Var a, double s);
    Var exp(Var a);
    Var gelu(Var a);
    Var clamp(Var a, double lo, double hi);
    Var softmax_rows(Var a);
    Var layer_norm_rows(Var x, Var gamma, Var beta, double eps = 1e-5);
    Var dropout(Var a, double p, Rng& rng);

    Var concat_rows(std::span<const Var> parts);
    Var concat_cols(std::span<const Var> parts);
    Var slice_rows(Var a, int begin, int count);
    Var slice_cols(Var a, int begin, int count);
    Var repeat_rows(Var row, int n);
    Var replace_rows(Var a, std::span<const int> rows, Var token);

    Var sum(Var a);
    Var sum_squares(Var a);
    Var mean_rows(Var a);

    // Skeleton-sequence operators on (T*J) x C matrices with time-major rows.
    Var mix_joints(Var a, const JointMixer& mixer);
    Var time_shift(Var a, int offset, int joints);
    Var time_pool2(Var a, int joints);

    // Negative log-softmax at `label` for a 1 x K logit row.
    Var softmax_cross_entropy(Var logits, int label);

    // Accumulates d(loss)/d(param) into grads (sized like the ParameterSet).
    void backward(Var loss, Gradients& grads);

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        const Matrix* external = nullptr;
        Matrix grad;
        int param = -1;
        std::function<void()> backward;
    };

    Var push(Matrix value, std::function<void()> backward = {});
    Matrix& grad(int id);
    const Matrix& val(int id) const;
    bool has_grad(int id) const { return nodes_[id].grad.size() > 0; }

    const ParameterSet* params_;
    std::vector<Node> nodes_;
};

}  // namespace signmotion::nn
