#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace signmotion::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Named, ordered collection of trainable arrays.  Indices are stable.
class ParameterSet {
public:
    int add(std::string name, Matrix init);

    int size() const { return static_cast<int>(values_.size()); }
    const Matrix& value(int i) const { return values_[i]; }
    Matrix& value(int i) { return values_[i]; }
    const std::string& name(int i) const { return names_[i]; }
    int find(const std::string& name) const;  // -1 when absent
    std::size_t scalar_count() const;

    std::vector<Matrix> zeros_like() const;

private:
    std::vector<std::string> names_;
    std::vector<Matrix> values_;
};

using Gradients = std::vector<Matrix>;

void accumulate(Gradients& into, const Gradients& from, double scale = 1.0);

}  // namespace signmotion::nn
