#pragma once

#include "signmotion/nn/tensor.hpp"

namespace signmotion::nn {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adaptive-moment gradient descent with bias correction.
class Adam {
public:
    Adam() = default;
    Adam(const ParameterSet& params, AdamConfig config);

    void step(ParameterSet& params, const Gradients& grads);

    const AdamConfig& config() const { return config_; }
    long long steps() const { return steps_; }
    const std::vector<Matrix>& first_moment() const { return m_; }
    const std::vector<Matrix>& second_moment() const { return v_; }

    void restore(long long steps, std::vector<Matrix> m, std::vector<Matrix> v);

private:
    AdamConfig config_;
    long long steps_ = 0;
    std::vector<Matrix> m_, v_;
};

}  // namespace signmotion::nn
