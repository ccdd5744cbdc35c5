#include "signmotion/semantic/cache.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>

#include "signmotion/common/error.hpp"
#include "signmotion/common/io.hpp"

namespace signmotion {

const char* to_string(Modality m) { return m == Modality::text ? "text" : "image"; }

namespace {

constexpr std::uint32_t kMagic = 0x43454d53;  // "SMEC"

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

std::uint32_t crc_of(const std::string& data, std::size_t at, std::size_t len) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(data.data() + at), static_cast<uInt>(len)));
}

std::string encode_payload(const std::string& ns, Modality modality, const std::string& key,
                           const std::vector<float>& vector) {
    std::string p;
    put_u32(p, static_cast<std::uint32_t>(ns.size()));
    p += ns;
    p.push_back(modality == Modality::text ? 0 : 1);
    put_u32(p, static_cast<std::uint32_t>(key.size()));
    p += key;
    put_u32(p, static_cast<std::uint32_t>(vector.size()));
    for (float f : vector) put_u32(p, std::bit_cast<std::uint32_t>(f));
    return p;
}

struct Decoded {
    std::string ns, key;
    Modality modality;
    std::vector<float> vector;
};

bool decode_payload(const std::string& p, Decoded& out) {
    std::size_t at = 0;
    auto need = [&](std::size_t n) { return at + n <= p.size(); };
    if (!need(4)) return false;
    const std::uint32_t ns_len = get_u32(p, at);
    at += 4;
    if (!need(ns_len + 1)) return false;
    out.ns = p.substr(at, ns_len);
    at += ns_len;
    const char m = p[at++];
    if (m != 0 && m != 1) return false;
    out.modality = m == 0 ? Modality::text : Modality::image;
    if (!need(4)) return false;
    const std::uint32_t key_len = get_u32(p, at);
    at += 4;
    if (!need(key_len + 4)) return false;
    out.key = p.substr(at, key_len);
    at += key_len;
    const std::uint32_t dim = get_u32(p, at);
    at += 4;
    if (p.size() - at != 4ull * dim) return false;
    out.vector.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i, at += 4) out.vector[i] = std::bit_cast<float>(get_u32(p, at));
    return true;
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!path_.empty()) load();
}

std::string EmbeddingCache::index_key(const std::string& ns, Modality modality, const std::string& key) {
    std::string k = ns;
    k.push_back('\0');
    k += to_string(modality);
    k.push_back('\0');
    k += key;
    return k;
}

void EmbeddingCache::load() {
    if (!std::filesystem::exists(path_)) return;
    const std::string data = read_file(path_);
    std::size_t at = 0;
    std::size_t good_end = 0;
    while (at < data.size()) {
        bool ok = at + 8 <= data.size() && get_u32(data, at) == kMagic;
        std::uint32_t len = 0;
        if (ok) {
            len = get_u32(data, at + 4);
            ok = at + 12 + static_cast<std::size_t>(len) <= data.size() &&
                 crc_of(data, at + 8, len) == get_u32(data, at + 8 + len);
        }
        Decoded rec;
        if (ok) ok = decode_payload(data.substr(at + 8, len), rec);
        if (!ok) {
            dropped_ = 1;
            std::cerr << "warning: embedding cache '" << path_.string() << "': dropping corrupt trailing data at byte "
                      << at << "\n";
            break;
        }
        index_[index_key(rec.ns, rec.modality, rec.key)] = std::move(rec.vector);
        at += 12 + len;
        good_end = at;
    }
    if (good_end < data.size()) std::filesystem::resize_file(path_, good_end);
}

std::optional<std::vector<float>> EmbeddingCache::lookup(const std::string& ns, Modality modality,
                                                         const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(index_key(ns, modality, key));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::store(const std::string& ns, Modality modality, const std::string& key,
                           const std::vector<float>& vector) {
    std::lock_guard lock(mutex_);
    if (!path_.empty()) {
        const std::string payload = encode_payload(ns, modality, key, vector);
        std::string record;
        put_u32(record, kMagic);
        put_u32(record, static_cast<std::uint32_t>(payload.size()));
        record += payload;
        put_u32(record, crc_of(payload, 0, payload.size()));
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        require(static_cast<bool>(out), ErrorCode::io, "cannot append to embedding cache '" + path_.string() + "'");
        out.write(record.data(), static_cast<std::streamsize>(record.size()));
        out.flush();
        require(static_cast<bool>(out), ErrorCode::io, "short write to embedding cache '" + path_.string() + "'");
    }
    index_[index_key(ns, modality, key)] = vector;
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mutex_);
    return index_.size();
}

}  // namespace signmotion
