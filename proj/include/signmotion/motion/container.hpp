#pragma once

#include <filesystem>
#include <string>

#include "signmotion/motion/motion.hpp"

namespace signmotion {

inline constexpr const char* kContainerFormatVersion = "1";

// Motion container: one UTF-8 JSON header line terminated by '\n' with keys
// format_version, gloss, fps, T, layout, channels, dtype, followed by the
// row-major float32 little-endian payload.
std::string encode_container(const Motion& motion);
Motion decode_container(const std::string& bytes);

void write_container(const Motion& motion, const std::filesystem::path& path);
Motion read_container(const std::filesystem::path& path);

}  // namespace signmotion
