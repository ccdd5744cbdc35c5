#include "signmotion/nn/archive.hpp"

#include <bit>
#include <cstring>

#include "signmotion/common/error.hpp"
#include "signmotion/common/io.hpp"

namespace signmotion::nn {

const Matrix& Archive::tensor(const std::string& name) const {
    for (const auto& [n, m] : tensors)
        if (n == name) return m;
    fail(ErrorCode::format, "archive has no tensor '" + name + "'");
}

bool Archive::has(const std::string& name) const {
    for (const auto& [n, m] : tensors)
        if (n == name) return true;
    return false;
}

void write_archive(const std::filesystem::path& path, const Archive& archive) {
    nlohmann::json header = archive.header;
    nlohmann::json table = nlohmann::json::array();
    std::size_t total = 0;
    for (const auto& [name, m] : archive.tensors) {
        table.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
        total += static_cast<std::size_t>(m.size());
    }
    header["tensors"] = table;
    std::string out = header.dump();
    out.push_back('\n');
    out.reserve(out.size() + 8 * total);
    for (const auto& [name, m] : archive.tensors) {
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            std::uint64_t bits = std::bit_cast<std::uint64_t>(m.data()[i]);
            for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
        }
    }
    write_file_atomic(path, out);
}

Archive read_archive(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    const auto newline = bytes.find('\n');
    require(newline != std::string::npos, ErrorCode::format, "archive '" + path.string() + "': missing header");
    Archive a;
    try {
        a.header = nlohmann::json::parse(bytes.substr(0, newline));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::format, "archive '" + path.string() + "': invalid header: " + e.what());
    }
    require(a.header.contains("tensors") && a.header["tensors"].is_array(), ErrorCode::format,
            "archive '" + path.string() + "': missing tensor table");
    std::size_t at = newline + 1;
    for (const auto& t : a.header["tensors"]) {
        const auto rows = t.at("rows").get<Eigen::Index>();
        const auto cols = t.at("cols").get<Eigen::Index>();
        const std::size_t n = static_cast<std::size_t>(rows * cols);
        require(at + 8 * n <= bytes.size(), ErrorCode::format,
                "archive '" + path.string() + "': truncated tensor '" + t.at("name").get<std::string>() + "'");
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < n; ++i, at += 8) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
            m.data()[i] = std::bit_cast<double>(bits);
        }
        a.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
    }
    require(at == bytes.size(), ErrorCode::format, "archive '" + path.string() + "': trailing bytes");
    a.header.erase("tensors");
    return a;
}

void append_parameters(Archive& archive, const std::string& prefix, const ParameterSet& params) {
    for (int i = 0; i < params.size(); ++i) archive.tensors.emplace_back(prefix + params.name(i), params.value(i));
}

void append_matrices(Archive& archive, const std::string& prefix, const ParameterSet& names,
                     const std::vector<Matrix>& values) {
    for (int i = 0; i < names.size(); ++i) archive.tensors.emplace_back(prefix + names.name(i), values[i]);
}

void load_parameters(const Archive& archive, const std::string& prefix, ParameterSet& params) {
    for (int i = 0; i < params.size(); ++i) {
        const Matrix& m = archive.tensor(prefix + params.name(i));
        require(m.rows() == params.value(i).rows() && m.cols() == params.value(i).cols(), ErrorCode::format,
                "archive tensor '" + params.name(i) + "' has the wrong shape");
        params.value(i) = m;
    }
}

std::vector<Matrix> load_matrices(const Archive& archive, const std::string& prefix, const ParameterSet& names) {
    std::vector<Matrix> out;
    for (int i = 0; i < names.size(); ++i) out.push_back(archive.tensor(prefix + names.name(i)));
    return out;
}

}  // namespace signmotion::nn
