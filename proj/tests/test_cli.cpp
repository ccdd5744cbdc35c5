#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "signmotion/cli/cli.hpp"
#include "signmotion/dataset/manifest_io.hpp"
#include "signmotion/motion/container.hpp"
#include "signmotion/toy/toy_data.hpp"
#include "test_util.hpp"

using namespace signmotion;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// One small prepared dataset and checkpoint shared by every case.
struct Workspace {
    testutil::TempDir dir{"cli"};
    fs::path config, data, run;

    Workspace() {
        ToyDataConfig toy;
        toy.words = {"book", "drink", "go"};
        toy.samples_per_word = 5;
        toy.frames = 12;
        write_toy_dataset(toy, dir / "raw");
        config = dir / "tiny.json";
        const nlohmann::json cfg = {
            {"model",
             {{"d_latent", 8}, {"d_model", 16}, {"n_heads", 2}, {"n_enc_layers", 1}, {"n_dec_layers", 1}, {"d_ff", 32},
              {"d_emb", 16}, {"max_T", 64}}},
            {"train", {{"epochs", 4}, {"batch_size", 4}, {"learning_rate", 1e-3}, {"checkpoint_every", 2},
                       {"schedule", {{"step", 2}, {"increment", 0.1}, {"cap", 0.6}}}}},
            {"embedding", {{"d_emb", 16}}},
            {"classifier", {{"epochs", 3}}},
            {"eval", {{"S_d", 2}, {"S_l", 2}}}};
        std::ofstream(config) << cfg.dump(2);
        data = dir / "data";
        run = dir / "run";
        REQUIRE(cli({"prepare-data", "--manifest", (dir / "raw" / "manifest.json").string(), "--min-samples", "2",
                     "--out", data.string()})
                    .code == 0);
        REQUIRE(cli({"train", "--data", data.string(), "--config", config.string(), "--seed", "3", "--out",
                     run.string()})
                    .code == 0);
    }
    std::string ckpt() const { return (run / "checkpoint.ckpt").string(); }
};

Workspace& ws() {
    static Workspace w;
    return w;
}

}  // namespace

TEST_CASE("exit codes for parse errors and help") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"train", "--out", "x"}).code == 2);
    CHECK(cli({"generate", "--checkpoint", "/nonexistent/model.ckpt", "--text", "drink", "--out",
               (ws().dir / "never.motion").string()})
              .code == 3);
}

TEST_CASE("prepare-data summary, stamps and QC errors") {
    auto& w = ws();
    const auto out = w.dir / "prep2";
    std::ofstream(w.dir / "qc.json") << R"({"go_001": {"keep_start": 2, "keep_end": 9, "reason": "leading_silence"}})";
    const Run ok = cli({"prepare-data", "--manifest", (w.dir / "raw" / "manifest.json").string(), "--qc",
                        (w.dir / "qc.json").string(), "--min-samples", "2", "--out", out.string()});
    CHECK(ok.code == 0);
    CHECK(ok.out == "3 words, 12 train, 3 test, 1 trimmed\n");
    const auto stamp = nlohmann::json::parse(slurp(out / "stamp.json"));
    CHECK(stamp.contains("config_sha256"));
    CHECK(stamp.contains("seed"));
    CHECK(stamp["versions"]["tool"] == "0.1.0");

    std::ofstream(w.dir / "bad_qc.json") << R"({"drink_002": {"keep_start": 4, "keep_end": 40, "reason": "none"}})";
    const Run bad = cli({"prepare-data", "--manifest", (w.dir / "raw" / "manifest.json").string(), "--qc",
                         (w.dir / "bad_qc.json").string(), "--min-samples", "2", "--out", (w.dir / "prep3").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("drink_002") != std::string::npos);
}

TEST_CASE("train writes a stamped log and checkpoints") {
    auto& w = ws();
    const std::string log = slurp(w.run / "train_log.csv");
    CHECK(log.rfind("epoch,mask_ratio,rec_loss,kl_loss,total_loss\n0,0,", 0) == 0);
    CHECK(fs::exists(w.run / "checkpoints" / "epoch_00002.ckpt"));
    const auto stamp = nlohmann::json::parse(slurp(w.run / "run_stamp.json"));
    CHECK(stamp["seed"] == 3);
    CHECK(stamp["command"] == "train");

    const auto again = w.dir / "run_again";
    REQUIRE(cli({"train", "--data", w.data.string(), "--config", w.config.string(), "--seed", "3", "--out",
                 again.string()})
                .code == 0);
    CHECK(slurp(again / "train_log.csv") == log);
    CHECK(slurp(again / "checkpoint.ckpt") == slurp(w.run / "checkpoint.ckpt"));

    const auto flat = w.dir / "run_flat";
    REQUIRE(cli({"train", "--data", w.data.string(), "--config", w.config.string(), "--no-curriculum", "--epochs", "5",
                 "--out", flat.string()})
                .code == 0);
    std::istringstream rows(slurp(flat / "train_log.csv"));
    std::string line;
    std::getline(rows, line);
    int n = 0;
    while (std::getline(rows, line)) {
        CHECK(line.substr(line.find(',') + 1, 2) == "0,");
        ++n;
    }
    CHECK(n == 5);
}

TEST_CASE("generate is deterministic and snaps images to the vocabulary") {
    auto& w = ws();
    const auto a = w.dir / "gen_a.motion", b = w.dir / "gen_b.motion";
    for (const auto& p : {a, b})
        REQUIRE(cli({"generate", "--checkpoint", w.ckpt(), "--text", "drink", "--frames", "60", "--seed", "7", "--out",
                     p.string()})
                    .code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(fs::path(a.string() + ".stamp.json")) == slurp(fs::path(b.string() + ".stamp.json")));
    const Motion m = read_container(a);
    CHECK(m.frame_count() == 60);
    CHECK(m.gloss() == std::optional<std::string>("drink"));
    const auto stamp = nlohmann::json::parse(slurp(fs::path(a.string() + ".stamp.json")));
    CHECK(stamp["seed"] == 7);

    fs::create_directories(w.dir / "pics");
    std::ofstream(w.dir / "pics" / "book.png") << "not really a png";
    const auto snapped = w.dir / "snap.motion";
    REQUIRE(cli({"generate", "--checkpoint", w.ckpt(), "--image", (w.dir / "pics" / "book.png").string(),
                 "--snap-to-vocab", "--out", snapped.string()})
                .code == 0);
    CHECK(read_container(snapped).gloss() == std::optional<std::string>("book"));
}

TEST_CASE("reconstruct keeps the sequence length") {
    auto& w = ws();
    const auto m = read_manifest(w.data / "manifest.json");
    const auto& rec = m.records.front();
    const auto out = w.dir / "rec.motion";
    REQUIRE(cli({"reconstruct", "--checkpoint", w.ckpt(), "--input", rec.source_path.string(), "--out", out.string()})
                .code == 0);
    CHECK(read_container(out).frame_count() == rec.frame_count);
    CHECK(fs::exists(out.string() + ".stamp.json"));
}

TEST_CASE("evaluate with identical groups has zero FID") {
    auto& w = ws();
    const auto report = w.dir / "report.json";
    const Run r = cli({"evaluate", "--raw", w.data.string(), "--rec", w.data.string(), "--gen", w.data.string(),
                       "--config", w.config.string(), "--out", report.string()});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["rows"].size() == 6u);
    for (const auto& row : j["rows"]) CHECK(row["fid"] == 0.0);
    CHECK(j.contains("stamp"));
    const auto report2 = w.dir / "report2.json";
    REQUIRE(cli({"evaluate", "--raw", w.data.string(), "--rec", w.data.string(), "--gen", w.data.string(),
                 "--config", w.config.string(), "--out", report2.string()})
                .code == 0);
    CHECK(slurp(report) == slurp(report2));
    CHECK(cli({"evaluate", "--raw", w.data.string(), "--rec", (w.dir / "pics").string(), "--gen", w.data.string(),
               "--out", (w.dir / "r3.json").string()})
              .code == 2);
}

TEST_CASE("embed and export") {
    auto& w = ws();
    const Run e = cli({"embed", "--text", "book", "--config", w.config.string()});
    REQUIRE(e.code == 0);
    const auto j = nlohmann::json::parse(e.out);
    CHECK(j["vector"].size() == 16u);

    const auto src = w.dir / "gen_a.motion";
    if (!fs::exists(src))
        REQUIRE(cli({"generate", "--checkpoint", w.ckpt(), "--text", "drink", "--seed", "7", "--out", src.string()})
                    .code == 0);
    const auto out = w.dir / "full.motion";
    REQUIRE(cli({"export", "--input", src.string(), "--out", out.string()}).code == 0);
    const Motion full = read_container(out);
    CHECK(full.layout().name() == smplx_full_layout().name());
    CHECK(full.channels() == Channels::axis_angle);
    CHECK(full.frame_count() == read_container(src).frame_count());
    CHECK(cli({"export", "--input", src.string(), "--channels", "quaternion", "--out", out.string()}).code == 2);
}
