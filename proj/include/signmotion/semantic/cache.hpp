#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace signmotion {

enum class Modality { text, image };

const char* to_string(Modality m);

// Append-only record file of (namespace, modality, key, vector) entries with
// an in-memory index.  Each record is framed as
//   u32 magic | u32 payload length | payload | u32 crc32(payload)
// so a torn trailing write is detected on load, dropped with a warning, and
// truncated away before further appends.
class EmbeddingCache {
public:
    EmbeddingCache() = default;  // memory only
    explicit EmbeddingCache(std::filesystem::path path);

    std::optional<std::vector<float>> lookup(const std::string& ns, Modality modality, const std::string& key) const;
    void store(const std::string& ns, Modality modality, const std::string& key, const std::vector<float>& vector);

    std::size_t size() const;
    std::size_t dropped_records() const { return dropped_; }

private:
    static std::string index_key(const std::string& ns, Modality modality, const std::string& key);
    void load();

    std::filesystem::path path_;
    std::map<std::string, std::vector<float>> index_;
    std::size_t dropped_ = 0;
    mutable std::mutex mutex_;
};

}  // namespace signmotion
