#include "signmotion/nn/tensor.hpp"

#include "signmotion/common/error.hpp"

namespace signmotion::nn {

int ParameterSet::add(std::string name, Matrix init) {
    require(find(name) < 0, ErrorCode::invalid_argument, "duplicate parameter '" + name + "'");
    names_.push_back(std::move(name));
    values_.push_back(std::move(init));
    return size() - 1;
}

int ParameterSet::find(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (names_[i] == name) return i;
    return -1;
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
    return n;
}

std::vector<Matrix> ParameterSet::zeros_like() const {
    std::vector<Matrix> out;
    out.reserve(values_.size());
    for (const auto& v : values_) out.push_back(Matrix::Zero(v.rows(), v.cols()));
    return out;
}

void accumulate(Gradients& into, const Gradients& from, double scale) {
    for (std::size_t i = 0; i < into.size(); ++i)
        if (from[i].size() > 0) into[i] += scale * from[i];
}

}  // namespace signmotion::nn
