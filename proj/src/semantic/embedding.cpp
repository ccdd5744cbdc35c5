#include "signmotion/semantic/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "signmotion/common/error.hpp"
#include "signmotion/common/hash.hpp"

namespace signmotion {

void ProviderConfig::validate() const {
    require(d_emb > 0, ErrorCode::config, "embedding dimension must be positive");
}

std::string StubProvider::id() const {
    return "stub-v1:seed=" + std::to_string(seed_) + ":d=" + std::to_string(dimension_);
}

std::vector<double> StubProvider::hash_direction(const std::string& tag, const std::string& key) const {
    std::string prefix = "signmotion-stub-v1";
    prefix.push_back('\0');
    for (int i = 0; i < 8; ++i) prefix.push_back(static_cast<char>((seed_ >> (8 * i)) & 0xFF));
    prefix += tag;
    prefix.push_back('\0');
    prefix += key;

    std::vector<double> v;
    v.reserve(dimension_);
    for (std::uint32_t block = 0; static_cast<int>(v.size()) < dimension_; ++block) {
        std::string msg = prefix;
        for (int i = 0; i < 4; ++i) msg.push_back(static_cast<char>((block >> (8 * i)) & 0xFF));
        const Sha256Digest d = sha256(msg);
        for (int w = 0; w < 8 && static_cast<int>(v.size()) < dimension_; ++w) {
            std::uint32_t word = 0;
            for (int i = 0; i < 4; ++i) word |= static_cast<std::uint32_t>(d[4 * w + i]) << (8 * i);
            v.push_back(2.0 * (static_cast<double>(word) + 0.5) / 4294967296.0 - 1.0);
        }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

namespace {

std::string image_stem(const std::string& ref) {
    std::string stem = std::filesystem::path(ref).stem().string();
    std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::tolower(c); });
    return stem;
}

std::vector<float> to_float(const std::vector<double>& v) { return {v.begin(), v.end()}; }

std::vector<float> normalized(const std::vector<float>& raw, const std::string& what) {
    double norm = 0.0;
    for (float x : raw) {
        require(std::isfinite(x), ErrorCode::transport, what + ": provider returned non-finite values");
        norm += static_cast<double>(x) * x;
    }
    norm = std::sqrt(norm);
    require(norm > 0.0, ErrorCode::transport, what + ": provider returned a zero vector");
    std::vector<float> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<float>(raw[i] / norm);
    return out;
}

}  // namespace

std::vector<float> StubProvider::embed(Modality modality, const std::string& key) {
    if (modality == Modality::text) return to_float(hash_direction("text", key));
    const auto word = hash_direction("text", image_stem(key));
    const auto own = hash_direction("image", key);
    std::vector<double> mixed(dimension_);
    double norm = 0.0;
    for (int i = 0; i < dimension_; ++i) {
        mixed[i] = word[i] + 0.5 * own[i];
        norm += mixed[i] * mixed[i];
    }
    norm = std::sqrt(norm);
    for (double& x : mixed) x /= norm;
    return to_float(mixed);
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config) {
    config.validate();
    if (config.provider == ProviderKind::stub) return std::make_unique<StubProvider>(config.d_emb, config.stub_seed);
    std::string endpoint = config.endpoint_or_model_ref;
    if (const char* env = std::getenv(kEndpointEnvVar); env != nullptr && *env != '\0') endpoint = env;
    require(!endpoint.empty(), ErrorCode::config, "real embedding provider needs an endpoint");
    return std::make_unique<HttpProvider>(endpoint, config.d_emb);
}

SemanticEncoder::SemanticEncoder(const ProviderConfig& config)
    : SemanticEncoder(make_provider(config), config.cache_path) {}

SemanticEncoder::SemanticEncoder(std::unique_ptr<EmbeddingProvider> provider, const std::string& cache_path)
    : provider_(std::move(provider)),
      cache_(cache_path.empty() ? EmbeddingCache() : EmbeddingCache(cache_path)) {}

SemanticEmbedding SemanticEncoder::embed(Modality modality, const std::string& key) {
    std::lock_guard lock(mutex_);
    const std::string ns = provider_->id();
    if (auto hit = cache_.lookup(ns, modality, key); hit && static_cast<int>(hit->size()) == dimension())
        return {std::move(*hit), modality, key};
    const std::vector<float> raw = provider_->embed(modality, key);
    require(static_cast<int>(raw.size()) == dimension(), ErrorCode::transport,
            "provider returned " + std::to_string(raw.size()) + " values, expected " + std::to_string(dimension()));
    std::vector<float> unit = normalized(raw, std::string(to_string(modality)) + " '" + key + "'");
    cache_.store(ns, modality, key, unit);
    return {std::move(unit), modality, key};
}

SemanticEmbedding SemanticEncoder::embed_text(const std::string& word) {
    require(!word.empty(), ErrorCode::invalid_argument, "embed_text: empty word");
    return embed(Modality::text, word);
}

SemanticEmbedding SemanticEncoder::embed_image(const std::string& image_ref) {
    require(!image_ref.empty(), ErrorCode::input, "embed_image: empty image reference");
    return embed(Modality::image, image_ref);
}

double cosine_similarity(const SemanticEmbedding& a, const SemanticEmbedding& b) {
    require(a.vector.size() == b.vector.size(), ErrorCode::shape, "cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.vector.size(); ++i) {
        dot += static_cast<double>(a.vector[i]) * b.vector[i];
        na += static_cast<double>(a.vector[i]) * a.vector[i];
        nb += static_cast<double>(b.vector[i]) * b.vector[i];
    }
    return dot / std::sqrt(na * nb);
}

std::string nearest_gloss(const SemanticEmbedding& query, const std::map<std::string, SemanticEmbedding>& vocabulary) {
    require(!vocabulary.empty(), ErrorCode::invalid_argument, "nearest_gloss: empty vocabulary");
    const std::string* best = nullptr;
    double best_sim = -2.0;
    for (const auto& [word, emb] : vocabulary) {  // std::map iterates lexicographically
        const double s = cosine_similarity(query, emb);
        if (s > best_sim) {
            best_sim = s;
            best = &word;
        }
    }
    return *best;
}

std::string nearest_gloss(const SemanticEmbedding& query, const std::vector<std::string>& vocabulary,
                          SemanticEncoder& encoder) {
    std::map<std::string, SemanticEmbedding> table;
    for (const auto& w : vocabulary) table.emplace(w, encoder.embed_text(w));
    return nearest_gloss(query, table);
}

}  // namespace signmotion
