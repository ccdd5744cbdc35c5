#include "signmotion/motion/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "signmotion/common/error.hpp"
#include "signmotion/common/io.hpp"

namespace signmotion {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kHeaderKeys[] = {"format_version", "gloss", "fps", "T", "layout", "channels", "dtype"};

void append_le(std::string& out, float value) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    char buf[4];
    std::memcpy(buf, &bits, 4);
    out.append(buf, 4);
}

float read_le(const char* p) {
    std::uint32_t bits;
    std::memcpy(&bits, p, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    return std::bit_cast<float>(bits);
}

[[noreturn]] void format_error(const std::string& field, const std::string& detail) {
    fail(ErrorCode::format, "motion container: " + field + ": " + detail);
}

}  // namespace

std::string encode_container(const Motion& motion) {
    ordered_json header;
    header["format_version"] = kContainerFormatVersion;
    header["gloss"] = motion.gloss() ? ordered_json(*motion.gloss()) : ordered_json(nullptr);
    header["fps"] = motion.fps();
    header["T"] = motion.frame_count();
    header["layout"] = motion.layout().name();
    header["channels"] = std::string(to_string(motion.channels()));
    header["dtype"] = "float32";
    std::string out = header.dump();
    out.push_back('\n');
    out.reserve(out.size() + 4 * static_cast<std::size_t>(motion.frames().size()));
    const FrameMatrix& f = motion.frames();
    for (Eigen::Index t = 0; t < f.rows(); ++t)
        for (Eigen::Index c = 0; c < f.cols(); ++c) append_le(out, f(t, c));
    return out;
}

Motion decode_container(const std::string& bytes) {
    const auto newline = bytes.find('\n');
    if (newline == std::string::npos) format_error("header", "missing header terminator");
    ordered_json header;
    try {
        header = ordered_json::parse(bytes.substr(0, newline));
    } catch (const nlohmann::json::exception& e) {
        format_error("header", std::string("invalid JSON: ") + e.what());
    }
    if (!header.is_object()) format_error("header", "not a JSON object");
    for (const char* key : kHeaderKeys)
        if (!header.contains(key)) format_error(key, "missing");
    if (header.size() != std::size(kHeaderKeys)) format_error("header", "unexpected extra keys");

    const auto& version = header["format_version"];
    if (!version.is_string() || version.get<std::string>() != kContainerFormatVersion)
        format_error("format_version", "unsupported version " + version.dump());
    if (!header["dtype"].is_string() || header["dtype"].get<std::string>() != "float32")
        format_error("dtype", "unsupported dtype " + header["dtype"].dump());
    if (!header["T"].is_number_integer() || header["T"].get<long long>() < 1)
        format_error("T", "must be a positive integer");
    if (!header["fps"].is_number()) format_error("fps", "must be a number");
    if (!header["layout"].is_string()) format_error("layout", "must be a string");
    if (!header["channels"].is_string()) format_error("channels", "must be a string");
    if (!header["gloss"].is_null() && !header["gloss"].is_string()) format_error("gloss", "must be a string or null");

    const JointLayout& layout = layout_by_name(header["layout"].get<std::string>());
    const Channels channels = channels_from_string(header["channels"].get<std::string>());
    const long long frames = header["T"].get<long long>();
    const long long width = static_cast<long long>(layout.size()) * channel_width(channels);
    const std::size_t payload = bytes.size() - newline - 1;
    const std::size_t expected = static_cast<std::size_t>(frames * width) * 4;
    if (payload != expected)
        format_error("payload length", "expected " + std::to_string(expected / 4) + " float32 values (T x " +
                                           std::to_string(width) + "), found " + std::to_string(payload / 4) +
                                           (payload % 4 ? " plus a partial value" : ""));

    FrameMatrix f(frames, width);
    const char* p = bytes.data() + newline + 1;
    for (Eigen::Index t = 0; t < f.rows(); ++t)
        for (Eigen::Index c = 0; c < f.cols(); ++c, p += 4) f(t, c) = read_le(p);

    std::optional<std::string> gloss;
    if (header["gloss"].is_string()) gloss = header["gloss"].get<std::string>();
    return Motion(layout, channels, std::move(f), header["fps"].get<double>(), std::move(gloss));
}

void write_container(const Motion& motion, const std::filesystem::path& path) {
    write_file_atomic(path, encode_container(motion));
}

Motion read_container(const std::filesystem::path& path) {
    return decode_container(read_file(path));
}

}  // namespace signmotion
