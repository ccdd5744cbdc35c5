#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "signmotion/semantic/cache.hpp"
#include "signmotion/semantic/embedding.hpp"
#include "test_util.hpp"

// After Eigen: resolv.h defines _res.
#include <httplib.h>

using namespace signmotion;
using testutil::error_code_of;

namespace {

double norm_of(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

// Wraps the stub and can be switched off to simulate an outage.
class FlakyProvider final : public EmbeddingProvider {
public:
    std::atomic<bool> down{false};
    std::atomic<int> calls{0};
    StubProvider inner{16, 0};
    std::string id() const override { return "flaky"; }
    int dimension() const override { return 16; }
    std::vector<float> embed(Modality m, const std::string& key) override {
        ++calls;
        if (down) fail(ErrorCode::transport, "provider is down");
        return inner.embed(m, key);
    }
};

class ConstantProvider final : public EmbeddingProvider {
public:
    explicit ConstantProvider(std::vector<float> v) : v_(std::move(v)) {}
    std::string id() const override { return "constant"; }
    int dimension() const override { return static_cast<int>(v_.size()); }
    std::vector<float> embed(Modality, const std::string&) override { return v_; }

private:
    std::vector<float> v_;
};

const std::vector<std::string> kTenWords = {"book", "drink", "go", "help", "thanks",
                                            "water", "eat", "friend", "school", "table"};

}  // namespace

TEST_CASE("stub text embedding matches the hash expansion oracle") {
    // Values computed independently with Python's hashlib for the documented byte layout.
    StubProvider p(512, 0);
    const auto v = p.embed(Modality::text, "book");
    REQUIRE(v.size() == 512u);
    CHECK(v[0] == doctest::Approx(-0.03586433596668844).epsilon(1e-6));
    CHECK(v[1] == doctest::Approx(-0.009338693624705286).epsilon(1e-6));
    CHECK(v[2] == doctest::Approx(-0.036430120394626946).epsilon(1e-6));
    CHECK(v[3] == doctest::Approx(0.014260365802912954).epsilon(1e-6));
    CHECK(v[511] == doctest::Approx(-0.0707480451585047).epsilon(1e-6));

    StubProvider small(8, 7);
    const double expected[8] = {0.01913199413451438,  0.19156071318003381,  -0.4944442532648567,
                                0.2970952694806129,   -0.02966520451311536, -0.5244178666346312,
                                -0.44639306624341946, 0.3937471884818601};
    const auto d = small.hash_direction("text", "drink");
    for (int i = 0; i < 8; ++i) CHECK(std::abs(d[i] - expected[i]) < 1e-15);
}

TEST_CASE("stub image embedding matches the oracle and stays near its file-name word") {
    StubProvider p(512, 0);
    const auto v = p.embed(Modality::image, "book.png");
    CHECK(v[0] == doctest::Approx(-0.04099622697293099).epsilon(1e-6));
    CHECK(v[1] == doctest::Approx(-0.0287121199949746).epsilon(1e-6));
    CHECK(v[2] == doctest::Approx(-0.05646277960185749).epsilon(1e-6));
    CHECK(v[3] == doctest::Approx(0.0024723181214478312).epsilon(1e-5));
    CHECK(p.embed(Modality::image, "pictures/BOOK.PNG") != v);
}

TEST_CASE("encoder embeddings are unit norm, deterministic and sized by config") {
    ProviderConfig pc;
    pc.d_emb = 64;
    SemanticEncoder enc(pc);
    for (const auto& w : kTenWords) {
        const auto e = enc.embed_text(w);
        CHECK(e.vector.size() == 64u);
        CHECK(std::abs(norm_of(e.vector) - 1.0) < 1e-6);
    }
    const auto a = enc.embed_image("book.png");
    const auto b = enc.embed_image("book.png");
    CHECK(a.vector == b.vector);
    CHECK(std::abs(norm_of(a.vector) - 1.0) < 1e-6);
    CHECK(enc.embed_text("drink").vector != enc.embed_text("book").vector);

    ProviderConfig other = pc;
    other.stub_seed = 1;
    SemanticEncoder enc2(other);
    CHECK(enc2.embed_text("drink").vector != enc.embed_text("drink").vector);
    CHECK(error_code_of([&] { enc.embed_text(""); }) == ErrorCode::invalid_argument);
}

TEST_CASE("encoder rejects degenerate provider output") {
    SemanticEncoder zero(std::make_unique<ConstantProvider>(std::vector<float>(4, 0.0f)), "");
    CHECK(error_code_of([&] { zero.embed_text("x"); }) == ErrorCode::transport);
    SemanticEncoder nan(std::make_unique<ConstantProvider>(std::vector<float>{1.0f, NAN}), "");
    CHECK(error_code_of([&] { nan.embed_text("x"); }) == ErrorCode::transport);
    SemanticEncoder scaled(std::make_unique<ConstantProvider>(std::vector<float>{3.0f, 4.0f}), "");
    CHECK(scaled.embed_text("x").vector == std::vector<float>{0.6f, 0.8f});
}

TEST_CASE("nearest gloss") {
    ProviderConfig pc;
    SemanticEncoder enc(pc);
    std::map<std::string, SemanticEmbedding> vocab;
    for (const auto& w : kTenWords) vocab.emplace(w, enc.embed_text(w));

    CHECK(nearest_gloss(vocab.at("book"), vocab) == "book");
    CHECK(nearest_gloss(enc.embed_text("water"), {{"water", vocab.at("water")}}) == "water");
    CHECK(nearest_gloss(enc.embed_text("go"), {{"drink", vocab.at("drink")}}) == "drink");

    // 0.9 book + 0.1 go, checked against a brute-force cosine scan.
    SemanticEmbedding q;
    q.vector.resize(512);
    const auto& vb = vocab.at("book").vector;
    const auto& vg = vocab.at("go").vector;
    for (int i = 0; i < 512; ++i) q.vector[i] = 0.9f * vb[i] + 0.1f * vg[i];
    const double n = norm_of(q.vector);
    for (auto& x : q.vector) x = static_cast<float>(x / n);
    std::string oracle;
    double best = -2.0;
    for (const auto& w : kTenWords) {
        double dot = 0.0;
        for (int i = 0; i < 512; ++i) dot += static_cast<double>(q.vector[i]) * vocab.at(w).vector[i];
        if (dot > best) best = dot, oracle = w;
    }
    CHECK(oracle == "book");
    CHECK(nearest_gloss(q, vocab) == oracle);

    SemanticEmbedding scaled = q;
    for (auto& x : scaled.vector) x *= 7.5f;
    CHECK(nearest_gloss(scaled, vocab) == nearest_gloss(q, vocab));

    std::map<std::string, SemanticEmbedding> tie = {{"zeta", vocab.at("book")}, {"alpha", vocab.at("book")}};
    CHECK(nearest_gloss(vocab.at("book"), tie) == "alpha");
    CHECK(error_code_of([&] { nearest_gloss(q, std::map<std::string, SemanticEmbedding>{}); }) ==
          ErrorCode::invalid_argument);

    CHECK(nearest_gloss(enc.embed_image("photos/book.png"), kTenWords, enc) == "book");
    CHECK(nearest_gloss(enc.embed_image("drink.jpg"), kTenWords, enc) == "drink");
}

TEST_CASE("cache persists across reopen and survives provider outages") {
    testutil::TempDir dir("cache");
    const std::string path = (dir / "emb.cache").string();
    std::vector<float> warm;
    {
        auto flaky = std::make_unique<FlakyProvider>();
        FlakyProvider* raw = flaky.get();
        SemanticEncoder enc(std::move(flaky), path);
        warm = enc.embed_text("book").vector;
        raw->down = true;
        CHECK(enc.embed_text("book").vector == warm);
        CHECK(raw->calls == 1);
        CHECK(error_code_of([&] { enc.embed_text("drink"); }) == ErrorCode::transport);
    }
    auto flaky = std::make_unique<FlakyProvider>();
    flaky->down = true;
    SemanticEncoder reopened(std::move(flaky), path);
    CHECK(reopened.embed_text("book").vector == warm);
}

TEST_CASE("a corrupt trailing cache record is dropped and truncated") {
    testutil::TempDir dir("cache_corrupt");
    const auto path = dir / "emb.cache";
    {
        EmbeddingCache c(path);
        c.store("ns", Modality::text, "a", {1.0f, 0.0f});
        c.store("ns", Modality::text, "b", {0.0f, 1.0f});
    }
    const auto clean_size = std::filesystem::file_size(path);
    {
        std::ofstream f(path, std::ios::binary | std::ios::app);
        f.write("SMEC\x20\x00\x00\x00partial", 15);
    }
    {
        EmbeddingCache c(path);
        CHECK(c.size() == 2u);
        CHECK(c.dropped_records() == 1u);
        CHECK(std::filesystem::file_size(path) == clean_size);
        c.store("ns", Modality::text, "c", {0.5f, 0.5f});
    }
    {
        EmbeddingCache c(path);
        CHECK(c.size() == 3u);
        CHECK(c.dropped_records() == 0u);
        CHECK(c.lookup("ns", Modality::text, "c") == std::vector<float>{0.5f, 0.5f});
        CHECK(!c.lookup("ns", Modality::image, "c").has_value());
    }
    {
        // Flip one payload byte of the last record so its checksum fails.
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(static_cast<std::streamoff>(std::filesystem::file_size(path)) - 6);
        f.put('\x7f');
    }
    EmbeddingCache c(path);
    CHECK(c.size() == 2u);
    CHECK(c.dropped_records() == 1u);
}

TEST_CASE("concurrent embedding calls return identical vectors") {
    testutil::TempDir dir("cache_threads");
    ProviderConfig pc;
    pc.d_emb = 32;
    pc.cache_path = (dir / "c.cache").string();
    SemanticEncoder enc(pc);
    std::vector<std::vector<float>> results(8);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([&, t] {
            for (const auto& w : kTenWords) results[t] = enc.embed_text(w).vector;
        });
    for (auto& th : threads) th.join();
    for (int t = 1; t < 8; ++t) CHECK(results[t] == results[0]);
    EmbeddingCache reread(pc.cache_path);
    CHECK(reread.size() == kTenWords.size());
}

TEST_CASE("http provider against a local endpoint") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto body = nlohmann::json::parse(req.body);
        const std::string input = body.at("input");
        if (input == "boom") {
            res.status = 500;
            return;
        }
        if (input == "garbage") {
            res.set_content("not json", "application/json");
            return;
        }
        std::vector<float> v(4, 0.0f);
        v[input.size() % 4] = 2.0f;
        if (body.at("modality") == "image") v[3] = body.contains("data_base64") ? 1.0f : -1.0f;
        res.set_content(nlohmann::json{{"embedding", v}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    SemanticEncoder enc(std::make_unique<HttpProvider>(base, 4), "");
    CHECK(enc.embed_text("go").vector == std::vector<float>{0.0f, 0.0f, 1.0f, 0.0f});
    CHECK(error_code_of([&] { enc.embed_text("boom"); }) == ErrorCode::transport);
    CHECK(error_code_of([&] { enc.embed_text("garbage"); }) == ErrorCode::transport);
    CHECK(error_code_of([&] { enc.embed_image("/definitely/missing.png"); }) == ErrorCode::input);

    testutil::TempDir dir("http_image");
    const auto img = dir / "book.png";
    std::ofstream(img, std::ios::binary) << "\x89PNG fake bytes";
    const auto e = enc.embed_image(img.string());
    CHECK(e.vector[3] > 0.0f);
    CHECK(std::abs(norm_of(e.vector) - 1.0) < 1e-6);

    SemanticEncoder wrong_dim(std::make_unique<HttpProvider>(base, 8), "");
    CHECK(error_code_of([&] { wrong_dim.embed_text("go"); }) == ErrorCode::transport);

    ProviderConfig pc;
    pc.provider = ProviderKind::real;
    pc.d_emb = 4;
    pc.endpoint_or_model_ref = "http://127.0.0.1:1";
    ::setenv(kEndpointEnvVar, base.c_str(), 1);
    SemanticEncoder via_env(pc);
    const int before = hits;
    CHECK(via_env.embed_text("help").vector.size() == 4u);
    CHECK(hits == before + 1);
    ::unsetenv(kEndpointEnvVar);

    server.stop();
    th.join();

    SemanticEncoder offline(std::make_unique<HttpProvider>(base, 4), "");
    CHECK(error_code_of([&] { offline.embed_text("go"); }) == ErrorCode::transport);
    pc.endpoint_or_model_ref.clear();
    CHECK(error_code_of([&] { SemanticEncoder missing(pc); }) == ErrorCode::config);
}
