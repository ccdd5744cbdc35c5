#include "signmotion/common/io.hpp"

#include <fstream>
#include <sstream>

#include "signmotion/common/error.hpp"

namespace signmotion {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::input, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorCode::io, "cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        require(static_cast<bool>(out), ErrorCode::io, "short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace signmotion
