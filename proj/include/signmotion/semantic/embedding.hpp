#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "signmotion/semantic/cache.hpp"

namespace signmotion {

struct SemanticEmbedding {
    std::vector<float> vector;
    Modality modality = Modality::text;
    std::string key;
};

enum class ProviderKind { stub, real };

struct ProviderConfig {
    ProviderKind provider = ProviderKind::stub;
    int d_emb = 512;
    std::string endpoint_or_model_ref;  // HTTP base URL for the real provider
    std::string cache_path;             // empty: in-memory only
    std::uint64_t stub_seed = 0;

    void validate() const;
};

inline constexpr const char* kEndpointEnvVar = "SIGNMOTION_EMBED_ENDPOINT";

// Source of raw embedding vectors.  Implementations may return unnormalized
// vectors; SemanticEncoder normalizes them.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual int dimension() const = 0;
    virtual std::vector<float> embed(Modality modality, const std::string& key) = 0;
};

// Offline provider.  For block b = 0, 1, ... the bytes
//   "signmotion-stub-v1" 0x00 | seed (u64 LE) | modality tag | 0x00 | key | b (u32 LE)
// are hashed with SHA-256; each digest yields eight little-endian u32 words
// w, mapped to 2 * (w + 0.5) / 2^32 - 1.  The first d_emb values are L2
// normalized.  Text keys are hashed as-is under tag "text".  An image key
// hashes to normalize(u_text(stem) + 0.5 * u_image(key)), where stem is the
// lower-cased file name without directory or extension, so a picture named
// after a word lands next to that word.
class StubProvider final : public EmbeddingProvider {
public:
    StubProvider(int dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {}
    std::string id() const override;
    int dimension() const override { return dimension_; }
    std::vector<float> embed(Modality modality, const std::string& key) override;

    // Unit vector of the hash expansion for one (tag, key) pair.
    std::vector<double> hash_direction(const std::string& tag, const std::string& key) const;

private:
    int dimension_;
    std::uint64_t seed_;
};

// Client for an embedding service: POST {base}/embed with
// {"modality": "text"|"image", "input": key[, "data_base64": ...]} and a
// {"embedding": [...]} response.
class HttpProvider final : public EmbeddingProvider {
public:
    HttpProvider(std::string base_url, int dimension);
    std::string id() const override;
    int dimension() const override { return dimension_; }
    std::vector<float> embed(Modality modality, const std::string& key) override;

private:
    std::string base_url_;
    int dimension_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config);

// Unit-norm embeddings for words and images with a persistent cache.
class SemanticEncoder {
public:
    explicit SemanticEncoder(const ProviderConfig& config);
    SemanticEncoder(std::unique_ptr<EmbeddingProvider> provider, const std::string& cache_path);

    SemanticEmbedding embed_text(const std::string& word);
    SemanticEmbedding embed_image(const std::string& image_ref);

    int dimension() const { return provider_->dimension(); }
    const EmbeddingProvider& provider() const { return *provider_; }

private:
    SemanticEmbedding embed(Modality modality, const std::string& key);

    std::unique_ptr<EmbeddingProvider> provider_;
    EmbeddingCache cache_;
    std::mutex mutex_;
};

double cosine_similarity(const SemanticEmbedding& a, const SemanticEmbedding& b);

// Argmax of cosine similarity; ties go to the lexicographically smallest word.
std::string nearest_gloss(const SemanticEmbedding& query, const std::map<std::string, SemanticEmbedding>& vocabulary);
std::string nearest_gloss(const SemanticEmbedding& query, const std::vector<std::string>& vocabulary,
                          SemanticEncoder& encoder);

}  // namespace signmotion
