#pragma once

#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "signmotion/nn/tensor.hpp"

namespace signmotion::nn {

// Tensor archive: a JSON header line (caller metadata plus a "tensors" table
// of name/rows/cols) terminated by '\n', then the tensors as float64
// little-endian in table order.  Written atomically.
struct Archive {
    nlohmann::json header;
    std::vector<std::pair<std::string, Matrix>> tensors;

    const Matrix& tensor(const std::string& name) const;
    bool has(const std::string& name) const;
};

void write_archive(const std::filesystem::path& path, const Archive& archive);
Archive read_archive(const std::filesystem::path& path);

// Parameter values keyed by name under a prefix ("param/", "adam_m/", ...).
void append_parameters(Archive& archive, const std::string& prefix, const ParameterSet& params);
void append_matrices(Archive& archive, const std::string& prefix, const ParameterSet& names,
                     const std::vector<Matrix>& values);
void load_parameters(const Archive& archive, const std::string& prefix, ParameterSet& params);
std::vector<Matrix> load_matrices(const Archive& archive, const std::string& prefix, const ParameterSet& names);

}  // namespace signmotion::nn
