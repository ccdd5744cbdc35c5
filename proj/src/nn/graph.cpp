#include "signmotion/nn/graph.hpp"

#include <cmath>
#include <numbers>

#include "signmotion/common/error.hpp"

namespace signmotion::nn {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::shape,
            std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Var Graph::push(Matrix value, std::function<void()> backward) {
    Node n;
    n.value = std::move(value);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Graph::val(int id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
}

const Matrix& Graph::value(Var v) const { return val(v.id); }

Matrix& Graph::grad(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) {
        const Matrix& v = val(id);
        n.grad = Matrix::Zero(v.rows(), v.cols());
    }
    return n.grad;
}

Var Graph::param(int index) {
    require(index >= 0 && index < params_->size(), ErrorCode::invalid_argument, "unknown parameter index");
    Node n;
    n.external = &params_->value(index);
    n.param = index;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Graph::constant(Matrix value) { return push(std::move(value)); }

Var Graph::matmul(Var a, Var b) {
    const Matrix& A = val(a.id);
    const Matrix& B = val(b.id);
    require(A.cols() == B.rows(), ErrorCode::shape, "matmul: inner dimensions differ");
    Matrix out;
    out.noalias() = A * B;
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, b, r] {
        const Matrix& g = nodes_[r.id].grad;
        grad(a.id).noalias() += g * val(b.id).transpose();
        grad(b.id).noalias() += val(a.id).transpose() * g;
    };
    return r;
}

Var Graph::matmul_nt(Var a, Var b) {
    const Matrix& A = val(a.id);
    const Matrix& B = val(b.id);
    require(A.cols() == B.cols(), ErrorCode::shape, "matmul_nt: inner dimensions differ");
    Matrix out;
    out.noalias() = A * B.transpose();
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, b, r] {
        const Matrix& g = nodes_[r.id].grad;
        grad(a.id).noalias() += g * val(b.id);
        grad(b.id).noalias() += g.transpose() * val(a.id);
    };
    return r;
}

Var Graph::add(Var a, Var b) {
    check_same_shape(val(a.id), val(b.id), "add");
    Var r = push(val(a.id) + val(b.id));
    nodes_[r.id].backward = [this, a, b, r] {
        const Matrix& g = nodes_[r.id].grad;
        grad(a.id) += g;
        grad(b.id) += g;
    };
    return r;
}

Var Graph::sub(Var a, Var b) {
    check_same_shape(val(a.id), val(b.id), "sub");
    Var r = push(val(a.id) - val(b.id));
    nodes_[r.id].backward = [this, a, b, r] {
        const Matrix& g = nodes_[r.id].grad;
        grad(a.id) += g;
        grad(b.id) -= g;
    };
    return r;
}

Var Graph::mul(Var a, Var b) {
    check_same_shape(val(a.id), val(b.id), "mul");
    Var r = push(val(a.id).cwiseProduct(val(b.id)));
    nodes_[r.id].backward = [this, a, b, r] {
        const Matrix& g = nodes_[r.id].grad;
        grad(a.id) += g.cwiseProduct(val(b.id));
        grad(b.id) += g.cwiseProduct(val(a.id));
    };
    return r;
}

Var Graph::add_row(Var a, Var row) {
    const Matrix& A = val(a.id);
    const Matrix& R = val(row.id);
    require(R.rows() == 1 && R.cols() == A.cols(), ErrorCode::shape, "add_row: bias width mismatch");
    Matrix out = A;
    out.rowwise() += R.row(0);
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, row, r] {
        const Matrix& g = nodes_[r.id].grad;
        grad(a.id) += g;
        grad(row.id) += g.colwise().sum();
    };
    return r;
}

Var Graph::scale(Var a, double s) {
    Var r = push(val(a.id) * s);
    nodes_[r.id].backward = [this, a, r, s] { grad(a.id) += nodes_[r.id].grad * s; };
    return r;
}

Var Graph::add_scalar(Var a, double s) {
    Var r = push(val(a.id).array() + s);
    nodes_[r.id].backward = [this, a, r] { grad(a.id) += nodes_[r.id].grad; };
    return r;
}

Var Graph::exp(Var a) {
    Var r = push(val(a.id).array().exp().matrix());
    nodes_[r.id].backward = [this, a, r] {
        grad(a.id) += nodes_[r.id].grad.cwiseProduct(nodes_[r.id].value);
    };
    return r;
}

Var Graph::gelu(Var a) {
    const Matrix& x = val(a.id);
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
        out.data()[i] = 0.5 * v * (1.0 + t);
    }
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, r] {
        const Matrix& g = nodes_[r.id].grad;
        const Matrix& x = val(a.id);
        Matrix& ga = grad(a.id);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double v = x.data()[i];
            const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
            const double dt = (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
            ga.data()[i] += g.data()[i] * (0.5 * (1.0 + t) + 0.5 * v * dt);
        }
    };
    return r;
}

Var Graph::clamp(Var a, double lo, double hi) {
    Var r = push(val(a.id).cwiseMax(lo).cwiseMin(hi));
    nodes_[r.id].backward = [this, a, r, lo, hi] {
        const Matrix& g = nodes_[r.id].grad;
        const Matrix& x = val(a.id);
        Matrix& ga = grad(a.id);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x.data()[i] >= lo && x.data()[i] <= hi) ga.data()[i] += g.data()[i];
    };
    return r;
}

Var Graph::softmax_rows(Var a) {
    const Matrix& x = val(a.id);
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double m = x.row(i).maxCoeff();
        out.row(i) = (x.row(i).array() - m).exp().matrix();
        out.row(i) /= out.row(i).sum();
    }
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, r] {
        const Matrix& g = nodes_[r.id].grad;
        const Matrix& y = nodes_[r.id].value;
        Matrix& ga = grad(a.id);
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            const double dot = g.row(i).dot(y.row(i));
            ga.row(i) += (y.row(i).array() * (g.row(i).array() - dot)).matrix();
        }
    };
    return r;
}

Var Graph::layer_norm_rows(Var x, Var gamma, Var beta, double eps) {
    const Matrix& X = val(x.id);
    const Matrix& G = val(gamma.id);
    const Matrix& B = val(beta.id);
    require(G.rows() == 1 && G.cols() == X.cols() && B.rows() == 1 && B.cols() == X.cols(), ErrorCode::shape,
            "layer_norm: affine width mismatch");
    const Eigen::Index n = X.cols();
    Matrix xhat(X.rows(), n);
    Vector inv_std(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double mean = X.row(i).mean();
        const double var = (X.row(i).array() - mean).square().mean();
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        xhat.row(i) = (X.row(i).array() - mean) * inv_std[i];
    }
    Matrix out = xhat.array().rowwise() * G.row(0).array();
    out.rowwise() += B.row(0);
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, x, gamma, beta, r, xhat = std::move(xhat), inv_std = std::move(inv_std), n] {
        const Matrix& g = nodes_[r.id].grad;
        grad(gamma.id) += g.cwiseProduct(xhat).colwise().sum();
        grad(beta.id) += g.colwise().sum();
        const Matrix gx = g.array().rowwise() * val(gamma.id).row(0).array();
        Matrix& gX = grad(x.id);
        for (Eigen::Index i = 0; i < gx.rows(); ++i) {
            const double s1 = gx.row(i).sum();
            const double s2 = gx.row(i).dot(xhat.row(i));
            gX.row(i) += ((static_cast<double>(n) * gx.row(i).array() - s1 - xhat.row(i).array() * s2) *
                          (inv_std[i] / static_cast<double>(n)))
                             .matrix();
        }
    };
    return r;
}

Var Graph::dropout(Var a, double p, Rng& rng) {
    if (p <= 0.0) return a;
    require(p < 1.0, ErrorCode::invalid_argument, "dropout probability must be < 1");
    const Matrix& x = val(a.id);
    Matrix mask(x.rows(), x.cols());
    const double keep = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.uniform01() < p ? 0.0 : keep;
    Var r = push(x.cwiseProduct(mask));
    nodes_[r.id].backward = [this, a, r, mask = std::move(mask)] {
        grad(a.id) += nodes_[r.id].grad.cwiseProduct(mask);
    };
    return r;
}

Var Graph::concat_rows(std::span<const Var> parts) {
    require(!parts.empty(), ErrorCode::shape, "concat_rows: nothing to concatenate");
    const Eigen::Index cols = val(parts[0].id).cols();
    Eigen::Index rows = 0;
    for (Var p : parts) {
        require(val(p.id).cols() == cols, ErrorCode::shape, "concat_rows: width mismatch");
        rows += val(p.id).rows();
    }
    Matrix out(rows, cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
        out.middleRows(at, val(p.id).rows()) = val(p.id);
        at += val(p.id).rows();
    }
    std::vector<Var> ids(parts.begin(), parts.end());
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, ids = std::move(ids), r] {
        const Matrix& g = nodes_[r.id].grad;
        Eigen::Index at = 0;
        for (Var p : ids) {
            const Eigen::Index n = val(p.id).rows();
            grad(p.id) += g.middleRows(at, n);
            at += n;
        }
    };
    return r;
}

Var Graph::concat_cols(std::span<const Var> parts) {
    require(!parts.empty(), ErrorCode::shape, "concat_cols: nothing to concatenate");
    const Eigen::Index rows = val(parts[0].id).rows();
    Eigen::Index cols = 0;
    for (Var p : parts) {
        require(val(p.id).rows() == rows, ErrorCode::shape, "concat_cols: height mismatch");
        cols += val(p.id).cols();
    }
    Matrix out(rows, cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
        out.middleCols(at, val(p.id).cols()) = val(p.id);
        at += val(p.id).cols();
    }
    std::vector<Var> ids(parts.begin(), parts.end());
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, ids = std::move(ids), r] {
        const Matrix& g = nodes_[r.id].grad;
        Eigen::Index at = 0;
        for (Var p : ids) {
            const Eigen::Index n = val(p.id).cols();
            grad(p.id) += g.middleCols(at, n);
            at += n;
        }
    };
    return r;
}

Var Graph::slice_rows(Var a, int begin, int count) {
    const Matrix& x = val(a.id);
    require(begin >= 0 && count >= 0 && begin + count <= x.rows(), ErrorCode::shape, "slice_rows: out of range");
    Var r = push(x.middleRows(begin, count));
    nodes_[r.id].backward = [this, a, r, begin, count] {
        grad(a.id).middleRows(begin, count) += nodes_[r.id].grad;
    };
    return r;
}

Var Graph::slice_cols(Var a, int begin, int count) {
    const Matrix& x = val(a.id);
    require(begin >= 0 && count >= 0 && begin + count <= x.cols(), ErrorCode::shape, "slice_cols: out of range");
    Var r = push(x.middleCols(begin, count));
    nodes_[r.id].backward = [this, a, r, begin, count] {
        grad(a.id).middleCols(begin, count) += nodes_[r.id].grad;
    };
    return r;
}

Var Graph::repeat_rows(Var row, int n) {
    const Matrix& x = val(row.id);
    require(x.rows() == 1 && n >= 1, ErrorCode::shape, "repeat_rows: expects a single row and n >= 1");
    Var r = push(x.replicate(n, 1));
    nodes_[r.id].backward = [this, row, r] { grad(row.id) += nodes_[r.id].grad.colwise().sum(); };
    return r;
}

Var Graph::replace_rows(Var a, std::span<const int> rows, Var token) {
    const Matrix& x = val(a.id);
    const Matrix& t = val(token.id);
    require(t.rows() == 1 && t.cols() == x.cols(), ErrorCode::shape, "replace_rows: token width mismatch");
    Matrix out = x;
    for (int i : rows) {
        require(i >= 0 && i < x.rows(), ErrorCode::shape, "replace_rows: row out of range");
        out.row(i) = t.row(0);
    }
    std::vector<int> idx(rows.begin(), rows.end());
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, token, r, idx = std::move(idx)] {
        Matrix g = nodes_[r.id].grad;
        Matrix& gt = grad(token.id);
        for (int i : idx) {
            gt.row(0) += g.row(i);
            g.row(i).setZero();
        }
        grad(a.id) += g;
    };
    return r;
}

Var Graph::sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = val(a.id).sum();
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, r] { grad(a.id).array() += nodes_[r.id].grad(0, 0); };
    return r;
}

Var Graph::sum_squares(Var a) {
    Matrix out(1, 1);
    out(0, 0) = val(a.id).squaredNorm();
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, r] { grad(a.id) += (2.0 * nodes_[r.id].grad(0, 0)) * val(a.id); };
    return r;
}

Var Graph::mean_rows(Var a) {
    const Matrix& x = val(a.id);
    Var r = push(x.colwise().mean());
    nodes_[r.id].backward = [this, a, r] {
        Matrix& ga = grad(a.id);
        const double inv = 1.0 / static_cast<double>(ga.rows());
        ga.rowwise() += nodes_[r.id].grad.row(0) * inv;
    };
    return r;
}

Var Graph::mix_joints(Var a, const JointMixer& mixer) {
    const Matrix& x = val(a.id);
    const int joints = mixer.joints();
    require(joints > 0 && x.rows() % joints == 0, ErrorCode::shape, "mix_joints: rows are not a multiple of joints");
    const Eigen::Index frames = x.rows() / joints;
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    for (Eigen::Index t = 0; t < frames; ++t)
        for (int j = 0; j < joints; ++j)
            for (const auto& [k, w] : mixer.neighbors[j]) out.row(t * joints + j) += w * x.row(t * joints + k);
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, r, &mixer, frames, joints] {
        const Matrix& g = nodes_[r.id].grad;
        Matrix& ga = grad(a.id);
        for (Eigen::Index t = 0; t < frames; ++t)
            for (int j = 0; j < joints; ++j)
                for (const auto& [k, w] : mixer.neighbors[j]) ga.row(t * joints + k) += w * g.row(t * joints + j);
    };
    return r;
}

Var Graph::time_shift(Var a, int offset, int joints) {
    const Matrix& x = val(a.id);
    require(joints > 0 && x.rows() % joints == 0, ErrorCode::shape, "time_shift: rows are not a multiple of joints");
    const Eigen::Index frames = x.rows() / joints;
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    // out[t] = x[t + offset], zero outside the sequence.
    const Eigen::Index lo = std::max<Eigen::Index>(0, -offset);
    const Eigen::Index hi = std::min<Eigen::Index>(frames, frames - offset);
    if (hi > lo) out.middleRows(lo * joints, (hi - lo) * joints) = x.middleRows((lo + offset) * joints, (hi - lo) * joints);
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, r, lo, hi, offset, joints] {
        if (hi <= lo) return;
        grad(a.id).middleRows((lo + offset) * joints, (hi - lo) * joints) +=
            nodes_[r.id].grad.middleRows(lo * joints, (hi - lo) * joints);
    };
    return r;
}

Var Graph::time_pool2(Var a, int joints) {
    const Matrix& x = val(a.id);
    require(joints > 0 && x.rows() % joints == 0, ErrorCode::shape, "time_pool2: rows are not a multiple of joints");
    const Eigen::Index frames = x.rows() / joints;
    const Eigen::Index out_frames = frames / 2;
    require(out_frames >= 1, ErrorCode::shape, "time_pool2: needs at least two frames");
    Matrix out(out_frames * joints, x.cols());
    for (Eigen::Index t = 0; t < out_frames; ++t)
        out.middleRows(t * joints, joints) =
            0.5 * (x.middleRows(2 * t * joints, joints) + x.middleRows((2 * t + 1) * joints, joints));
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, a, r, out_frames, joints] {
        const Matrix& g = nodes_[r.id].grad;
        Matrix& ga = grad(a.id);
        for (Eigen::Index t = 0; t < out_frames; ++t) {
            ga.middleRows(2 * t * joints, joints) += 0.5 * g.middleRows(t * joints, joints);
            ga.middleRows((2 * t + 1) * joints, joints) += 0.5 * g.middleRows(t * joints, joints);
        }
    };
    return r;
}

Var Graph::softmax_cross_entropy(Var logits, int label) {
    const Matrix& x = val(logits.id);
    require(x.rows() == 1 && label >= 0 && label < x.cols(), ErrorCode::shape,
            "softmax_cross_entropy: expects 1 x K logits and a label in range");
    const double m = x.maxCoeff();
    Matrix p = (x.array() - m).exp().matrix();
    const double z = p.sum();
    p /= z;
    Matrix out(1, 1);
    out(0, 0) = std::log(z) + m - x(0, label);
    Var r = push(std::move(out));
    nodes_[r.id].backward = [this, logits, r, label, p = std::move(p)] {
        Matrix g = p;
        g(0, label) -= 1.0;
        grad(logits.id) += nodes_[r.id].grad(0, 0) * g;
    };
    return r;
}

void Graph::backward(Var loss, Gradients& grads) {
    require(val(loss.id).size() == 1, ErrorCode::shape, "backward: loss must be a scalar");
    require(static_cast<int>(grads.size()) == params_->size(), ErrorCode::shape,
            "backward: gradient buffer does not match the parameter set");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    grad(loss.id)(0, 0) = 1.0;
    for (int i = loss.id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.grad.size() == 0) continue;
        if (n.param >= 0) {
            Matrix& target = grads[n.param];
            if (target.size() == 0) target = Matrix::Zero(n.grad.rows(), n.grad.cols());
            target += n.grad;
        } else if (n.backward) {
            n.backward();
        }
    }
}

}  // namespace signmotion::nn
