#pragma once

#include <filesystem>
#include <string>

namespace signmotion {

std::string read_file(const std::filesystem::path& path);

// Write to a sibling temporary and rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace signmotion
