#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "signmotion/model/checkpoint.hpp"
#include "signmotion/model/cvae.hpp"
#include "signmotion/nn/archive.hpp"
#include "test_util.hpp"

using namespace signmotion;
using testutil::error_code_of;

namespace {

ModelConfig small_config() {
    ModelConfig c;
    c.d_latent = 8;
    c.d_model = 16;
    c.n_heads = 2;
    c.n_enc_layers = 1;
    c.n_dec_layers = 1;
    c.d_ff = 32;
    c.max_T = 64;
    c.d_emb = 16;
    return c;
}

SemanticEncoder& stub16() {
    static SemanticEncoder enc([] {
        ProviderConfig pc;
        pc.d_emb = 16;
        return pc;
    }());
    return enc;
}

Motion distinct_motion(int frames, unsigned seed) { return convert_channels(testutil::random_motion(frames, seed), Channels::sixd); }

double naive_rec(const FrameMatrix& a, const FrameMatrix& b) {
    double total = 0.0;
    for (int t = 0; t < a.rows(); ++t) {
        double frame = 0.0;
        for (int c = 0; c < a.cols(); ++c) {
            const double d = static_cast<double>(a(t, c)) - static_cast<double>(b(t, c));
            frame += d * d;
        }
        total += frame;
    }
    return total / a.rows();
}

LatentDistribution dist(std::initializer_list<double> mu, std::initializer_list<double> lv) {
    LatentDistribution d;
    d.mu = Eigen::VectorXd::Map(std::vector<double>(mu).data(), static_cast<Eigen::Index>(mu.size()));
    d.log_var = Eigen::VectorXd::Map(std::vector<double>(lv).data(), static_cast<Eigen::Index>(lv.size()));
    return d;
}

}  // namespace

TEST_CASE("model config validation") {
    ModelConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    c.n_heads = 3;
    CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::config);
    c = small_config();
    c.pose_dim = 100;
    CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::config);
    c = small_config();
    c.max_T = 0;
    CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::config);
    const ModelConfig back = model_config_from_json(to_json(small_config()));
    CHECK(to_json(back) == to_json(small_config()));
    const ModelConfig d;
    CHECK(d.d_model == 256);
    CHECK(d.n_enc_layers == 4);
    CHECK(d.d_latent == 256);
    CHECK(d.pose_dim == 312);
}

TEST_CASE("reconstruction loss") {
    const Motion a = testutil::random_motion(5, 1);
    CHECK(reconstruction_loss(a, a) == 0.0);

    FrameMatrix f = FrameMatrix::Zero(2, 156), g = f;
    g(1, 7) = 2.0f;
    const Motion x(upper_pose_layout(), Channels::axis_angle, f, 30.0), y(upper_pose_layout(), Channels::axis_angle, g, 30.0);
    CHECK(std::abs(reconstruction_loss(x, y) - 2.0) < 1e-12);

    const Motion b = testutil::random_motion(5, 2);
    CHECK(std::abs(reconstruction_loss(a, b) - naive_rec(a.frames(), b.frames())) < 1e-9);
    CHECK(reconstruction_loss(a, b) == reconstruction_loss(b, a));
    CHECK(reconstruction_loss(a, b) > 0.0);
    CHECK(error_code_of([&] { reconstruction_loss(a, testutil::random_motion(4, 1)); }) == ErrorCode::shape);
}

TEST_CASE("KL divergence to the standard normal") {
    CHECK(kl_loss(dist({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0})) == 0.0);
    CHECK(std::abs(kl_loss(dist({1.0}, {0.0})) - 0.5) < 1e-12);
    CHECK(std::abs(kl_loss(dist({0.0, 0.0}, {std::log(2.0), std::log(2.0)})) - (1.0 - std::log(2.0))) < 1e-12);
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        LatentDistribution d;
        d.mu = Eigen::VectorXd::NullaryExpr(6, [&] { return rng.uniform(-3, 3); });
        d.log_var = Eigen::VectorXd::NullaryExpr(6, [&] { return rng.uniform(-5, 5); });
        CHECK(kl_loss(d) > 0.0);
    }
}

TEST_CASE("combined objective") {
    const Motion a = testutil::random_motion(3, 1), b = testutil::random_motion(3, 2);
    const auto d = dist({0.3, -0.2}, {0.1, 0.4});
    CHECK(cvae_loss(a, b, d, 0.0) == reconstruction_loss(a, b));
    CHECK(cvae_loss(a, a, dist({0.0}, {0.0}), 1e-5) == 0.0);
    CHECK(std::abs(cvae_loss(a, b, d, 1e-5) - (reconstruction_loss(a, b) + 1e-5 * kl_loss(d))) < 1e-12);
    CHECK(error_code_of([&] { cvae_loss(a, b, d, -1.0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("reparameterization") {
    auto d = dist({0.5, -1.0, 2.0}, {kLogVarMin, kLogVarMin, kLogVarMin});
    for (std::uint64_t s = 0; s < 20; ++s) CHECK((reparameterize(d, s).z - d.mu).cwiseAbs().maxCoeff() < 1e-4);
    const auto d2 = dist({0.1, 0.2}, {0.3, -0.4});
    CHECK(reparameterize(d2, 9).z == reparameterize(d2, 9).z);
    CHECK(reparameterize(d2, 9).z != reparameterize(d2, 10).z);
    CHECK(reparameterize(d2, 9).seed == 9u);

    LatentDistribution unit;
    unit.mu = Eigen::VectorXd::Zero(4);
    unit.log_var = Eigen::VectorXd::Zero(4);
    const int n = 100000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(4), sq = Eigen::VectorXd::Zero(4);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd z = reparameterize(unit, static_cast<std::uint64_t>(i)).z;
        sum += z;
        sq += z.cwiseProduct(z);
    }
    const Eigen::VectorXd mean = sum / n;
    const Eigen::VectorXd var = sq / n - mean.cwiseProduct(mean);
    CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
    CHECK((var.array() - 1.0).abs().maxCoeff() < 0.05);
}

TEST_CASE("encoder shapes, determinism and position sensitivity") {
    const CvaeModel model(small_config(), 5);
    const auto cond = stub16().embed_text("drink");
    const Motion m = distinct_motion(10, 3);
    const auto d = model.encode(m, cond);
    CHECK(d.mu.size() == 8);
    CHECK(d.log_var.size() == 8);
    const auto again = model.encode(m, cond);
    CHECK(d.mu == again.mu);
    CHECK(d.log_var == again.log_var);
    CHECK((d.log_var.array() >= kLogVarMin).all());
    CHECK((d.log_var.array() <= kLogVarMax).all());

    FrameMatrix reversed = m.frames().colwise().reverse();
    const Motion r(m.layout(), m.channels(), reversed, m.fps(), m.gloss());
    CHECK((model.encode(r, cond).mu - d.mu).cwiseAbs().maxCoeff() > 1e-9);

    for (int T : {1, 2, 17, 64}) CHECK(model.encode(distinct_motion(T, T), cond).mu.size() == 8);
    CHECK(error_code_of([&] { model.encode(distinct_motion(65, 1), cond); }) == ErrorCode::sequence_length);
    SemanticEmbedding wrong;
    wrong.vector.assign(12, 0.1f);
    CHECK(error_code_of([&] { model.encode(m, wrong); }) == ErrorCode::shape);
    const Motion other_layout = convert_channels(testutil::random_motion(3, 1, 0.5, smplx_full_layout()), Channels::sixd);
    CHECK(error_code_of([&] { model.encode(other_layout, cond); }) == ErrorCode::shape);
}

TEST_CASE("decoder shapes, determinism and batch invariance") {
    ModelConfig c = small_config();
    c.max_T = 120;
    const CvaeModel model(c, 6);
    const auto cond = stub16().embed_text("book");
    LatentSample z;
    z.z = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
    const Motion out = model.decode(z, cond, 60);
    CHECK(out.frame_count() == 60);
    CHECK(out.frame_width() == 312);
    CHECK(out.channels() == Channels::sixd);
    CHECK(model.decode(z, cond, 60) == out);
    CHECK(out.gloss() == std::optional<std::string>("book"));
    for (int T : {1, 5, 120}) CHECK(model.decode(z, cond, T).frame_count() == T);
    CHECK(error_code_of([&] { model.decode(z, cond, 121); }) == ErrorCode::sequence_length);
    CHECK(error_code_of([&] { model.decode(z, cond, 0); }) == ErrorCode::sequence_length);

    std::vector<LatentSample> zs;
    std::vector<SemanticEmbedding> conds;
    std::vector<int> lengths;
    for (int i = 0; i < 4; ++i) {
        LatentSample s;
        s.z = Eigen::VectorXd::Constant(8, 0.3 * i - 0.5);
        zs.push_back(s);
        conds.push_back(stub16().embed_text(i % 2 ? "drink" : "go"));
        lengths.push_back(10 + 7 * i);
    }
    const auto batch = model.decode_batch(zs, conds, lengths);
    for (int i = 0; i < 4; ++i) {
        const Motion alone = model.decode(zs[i], conds[i], lengths[i]);
        CHECK((batch[i].frames() - alone.frames()).cwiseAbs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("generation and reconstruction contracts") {
    const CvaeModel empty;
    const auto cond = stub16().embed_text("drink");
    CHECK(error_code_of([&] { empty.generate(cond, 10, 1); }) == ErrorCode::state);
    CHECK(error_code_of([&] { empty.reconstruct(distinct_motion(3, 1), cond, 1); }) == ErrorCode::state);

    const CvaeModel model(small_config(), 8);
    CHECK(model.generate(cond, 20, 4) == model.generate(cond, 20, 4));
    CHECK((model.generate(cond, 20, 4).frames() - model.generate(cond, 20, 5).frames()).cwiseAbs().maxCoeff() > 1e-4);
    const Motion m = distinct_motion(13, 2);
    const Motion r = model.reconstruct(m, cond, 3);
    CHECK(r.frame_count() == 13);
    CHECK(model.reconstruct(m, cond, 3) == r);
}

TEST_CASE("analytic gradients match central differences on the tiny config") {
    const auto result = testutil::gradient_check();
    for (const auto& b : result.blocks) {
        INFO(b.name << " relative error " << b.relative_error << " norms " << b.analytic_norm << " " << b.numeric_norm);
        CHECK(b.relative_error < 1e-3);
    }
    CHECK(result.blocks.size() > 20u);
    CHECK(result.worst < 1e-3);
    for (const auto& b : result.blocks)
        if (b.name.find("attn.k.bias") != std::string::npos) CHECK(b.analytic_norm < 1e-12);
}

TEST_CASE("checkpoint roundtrip and version guard") {
    testutil::TempDir dir("ckpt");
    const CvaeModel model(small_config(), 9);
    CheckpointState st;
    st.epoch = 12;
    st.rng_state = Rng(4).state();
    st.metadata = {{"vocabulary", {"book", "drink"}}};
    st.optimizer = nn::Adam(model.parameters(), nn::AdamConfig{});
    save_checkpoint(dir / "a.ckpt", model, st);
    const auto loaded = load_checkpoint(dir / "a.ckpt");
    CHECK(loaded.state.epoch == 12);
    CHECK(loaded.state.rng_state == st.rng_state);
    CHECK(loaded.state.metadata == st.metadata);
    CHECK(loaded.state.optimizer.has_value());
    CHECK(to_json(loaded.model.config()) == to_json(model.config()));
    const auto cond = stub16().embed_text("book");
    CHECK(loaded.model.generate(cond, 9, 2) == model.generate(cond, 9, 2));

    CHECK(error_code_of([&] { load_checkpoint(dir / "missing.ckpt"); }) == ErrorCode::state);
    nn::Archive a = nn::read_archive(dir / "a.ckpt");
    a.header["version"] = 99;
    nn::write_archive(dir / "v99.ckpt", a);
    CHECK(error_code_of([&] { load_checkpoint(dir / "v99.ckpt"); }) == ErrorCode::format);
}
