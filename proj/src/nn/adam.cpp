#include "signmotion/nn/adam.hpp"

#include <cmath>

#include "signmotion/common/error.hpp"

namespace signmotion::nn {

Adam::Adam(const ParameterSet& params, AdamConfig config)
    : config_(config), m_(params.zeros_like()), v_(params.zeros_like()) {}

void Adam::step(ParameterSet& params, const Gradients& grads) {
    require(static_cast<int>(grads.size()) == params.size() && m_.size() == grads.size(), ErrorCode::shape,
            "adam: gradient buffer does not match parameters");
    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    for (int i = 0; i < params.size(); ++i) {
        if (grads[i].size() == 0) continue;
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i].cwiseAbs2();
        params.value(i).array() -=
            config_.learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
    }
}

void Adam::restore(long long steps, std::vector<Matrix> m, std::vector<Matrix> v) {
    require(m.size() == m_.size() && v.size() == v_.size(), ErrorCode::format,
            "adam state does not match the parameter set");
    steps_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
}

}  // namespace signmotion::nn
