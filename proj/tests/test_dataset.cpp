#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "signmotion/common/io.hpp"
#include "signmotion/dataset/dataset.hpp"
#include "signmotion/dataset/manifest_io.hpp"
#include "signmotion/motion/container.hpp"
#include "test_util.hpp"

using namespace signmotion;
using testutil::error_code_of;

namespace {

DatasetManifest synthetic_manifest(const std::map<std::string, int>& counts) {
    DatasetManifest m;
    for (const auto& [word, n] : counts)
        for (int i = 0; i < n; ++i) {
            char id[64];
            std::snprintf(id, sizeof id, "%s_%03d", word.c_str(), i);
            m.records.push_back({id, word, std::string(id) + ".motion", 10, std::nullopt, Split::unassigned});
        }
    return m;
}

std::map<std::string, std::pair<int, int>> split_counts(const DatasetManifest& m) {
    std::map<std::string, std::pair<int, int>> out;
    for (const auto& r : m.records) {
        REQUIRE(r.split != Split::unassigned);
        (r.split == Split::train ? out[r.gloss].first : out[r.gloss].second)++;
    }
    return out;
}

std::string payload_of(const std::string& container) { return container.substr(container.find('\n') + 1); }

ClipRecord write_clip(const std::filesystem::path& dir, const std::string& id, const std::string& gloss, int frames,
                      unsigned seed) {
    const Motion m = testutil::random_motion(frames, seed);
    const auto path = dir / (id + ".motion");
    write_container(Motion(m.layout(), m.channels(), m.frames(), m.fps(), gloss), path);
    return {id, gloss, path, frames, std::nullopt, Split::unassigned};
}

}  // namespace

TEST_CASE("annotation validation") {
    const ClipRecord r{"table_01", "table", "x", 48, std::nullopt, Split::unassigned};
    CHECK_NOTHROW(validate_annotation(r, {0, 21, QcReason::trailing_noise}));
    CHECK_NOTHROW(validate_annotation(r, {0, 48, QcReason::none}));
    CHECK(error_code_of([&] { validate_annotation(r, {10, 10, QcReason::none}); }) == ErrorCode::invalid_annotation);
    CHECK(error_code_of([&] { validate_annotation(r, {-1, 5, QcReason::none}); }) == ErrorCode::invalid_annotation);
    CHECK(error_code_of([&] { validate_annotation(r, {0, 49, QcReason::none}); }) == ErrorCode::invalid_annotation);
    CHECK(testutil::error_message_of([&] { validate_annotation(r, {12, 3, QcReason::none}); }).find("table_01") !=
          std::string::npos);
    CHECK(qc_reason_from_string("leading_silence") == QcReason::leading_silence);
}

TEST_CASE("trimming a 48-frame clip to 21 frames is a bit-exact slice") {
    testutil::TempDir dir("trim");
    const ClipRecord src = write_clip(dir.path, "table_01", "table", 48, 17);
    const std::string before = read_file(src.source_path);

    const ClipRecord out = trim_clip(src, {0, 21, QcReason::trailing_noise}, dir / "table_01_trim.motion");
    CHECK(out.frame_count == 21);
    CHECK(out.qc.has_value());
    CHECK(read_file(src.source_path) == before);

    const std::string trimmed = read_file(out.source_path);
    const std::size_t row_bytes = 156 * 4;
    CHECK(payload_of(trimmed) == payload_of(before).substr(0, 21 * row_bytes));
    CHECK(read_container(out.source_path).frame_count() == 21);

    const ClipRecord mid = trim_clip(src, {5, 30, QcReason::both}, dir / "mid.motion");
    CHECK(payload_of(read_file(mid.source_path)) == payload_of(before).substr(5 * row_bytes, 25 * row_bytes));

    const ClipRecord full = trim_clip(src, {0, 48, QcReason::none}, dir / "full.motion");
    CHECK(read_container(full.source_path) == read_container(src.source_path));
    CHECK(payload_of(read_file(full.source_path)) == payload_of(before));

    CHECK(error_code_of([&] { trim_clip(src, {10, 10, QcReason::none}, dir / "bad.motion"); }) ==
          ErrorCode::invalid_annotation);
    CHECK(error_code_of([&] { trim_clip(src, {0, 10, QcReason::none}, src.source_path); }) ==
          ErrorCode::invalid_argument);
    CHECK(read_file(src.source_path) == before);
}

TEST_CASE("trim never lengthens and matches the in-memory slice") {
    const Motion m = testutil::random_motion(20, 3);
    for (int a = 0; a < 20; a += 3)
        for (int b = a + 1; b <= 20; b += 4) {
            const Motion t = trim_motion(m, {a, b, QcReason::none});
            CHECK(t.frame_count() == b - a);
            CHECK(t.frames().cwiseEqual(m.frames().middleRows(a, b - a)).all());
        }
}

TEST_CASE("minimum-sample filter") {
    CHECK(filter_by_min_samples({{"drink", 25}, {"table", 19}, {"go", 17}}, 18) ==
          std::vector<std::string>{"drink", "table"});
    CHECK(filter_by_min_samples({{"b", 0}, {"a", 3}}, 0) == std::vector<std::string>{"a", "b"});
    CHECK(filter_by_min_samples({{"a", 3}}, 4).empty());
}

TEST_CASE("per-word 8:2 split follows the floor rule for every n in [1, 50]") {
    for (int n = 1; n <= 50; ++n) {
        // Integer oracle: floor(8n/10), at least one when n >= 2.
        const int expected_train = n == 1 ? 1 : std::max(1, (8 * n) / 10);
        CHECK(train_count(n, 0.8) == expected_train);
        std::vector<std::string> warnings;
        const auto split = make_split(synthetic_manifest({{"w", n}}), 0.8, 42, &warnings);
        const auto counts = split_counts(split).at("w");
        CHECK(counts.first == expected_train);
        CHECK(counts.second == n - expected_train);
        CHECK(warnings.size() == (n == 1 ? 1u : 0u));
    }
    const auto twenty = split_counts(make_split(synthetic_manifest({{"drink", 20}}), 0.8, 0)).at("drink");
    CHECK(twenty == std::pair<int, int>{16, 4});
}

TEST_CASE("split is a pure function of manifest, ratio and seed") {
    const auto m = synthetic_manifest({{"a", 9}, {"b", 14}, {"c", 23}});
    const auto s1 = make_split(m, 0.8, 7);
    const auto s2 = make_split(m, 0.8, 7);
    bool differs = false;
    const auto s3 = make_split(m, 0.8, 8);
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        CHECK(s1.records[i].split == s2.records[i].split);
        differs = differs || s1.records[i].split != s3.records[i].split;
    }
    CHECK(differs);

    // Record order in the input does not matter.
    DatasetManifest reversed = m;
    std::reverse(reversed.records.begin(), reversed.records.end());
    const auto s4 = make_split(reversed, 0.8, 7);
    std::map<std::string, Split> a, b;
    for (const auto& r : s1.records) a[r.clip_id] = r.split;
    for (const auto& r : s4.records) b[r.clip_id] = r.split;
    CHECK(a == b);

    CHECK(error_code_of([&] { make_split(m, 1.0, 0); }) == ErrorCode::invalid_argument);
    CHECK(error_code_of([&] { make_split(m, 0.0, 0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("top-k subset") {
    const auto m = synthetic_manifest({{"a", 5}, {"b", 7}, {"c", 6}});
    auto words = [](const DatasetManifest& d) {
        std::vector<std::string> w;
        for (const auto& [k, v] : d.word_counts()) w.push_back(k);
        return w;
    };
    CHECK(words(select_top_k_subset(m, 2)) == std::vector<std::string>{"b", "c"});
    CHECK(words(select_top_k_subset(m, 3)) == std::vector<std::string>{"a", "b", "c"});
    CHECK(words(select_top_k_subset(synthetic_manifest({{"z", 5}, {"y", 5}, {"x", 6}}), 2)) ==
          std::vector<std::string>{"x", "y"});
    CHECK(error_code_of([&] { select_top_k_subset(m, 4); }) == ErrorCode::invalid_argument);
}

TEST_CASE("manifest and QC sidecar io") {
    testutil::TempDir dir("manifest");
    DatasetManifest m = make_split(synthetic_manifest({{"go", 3}}), 0.8, 1);
    m.records[0].qc = QcAnnotation{1, 5, QcReason::leading_silence};
    write_manifest(m, dir / "m.json");
    const auto r = read_manifest(dir / "m.json");
    REQUIRE(r.records.size() == 3u);
    CHECK(r.records[0].qc->keep_end == 5);
    CHECK(r.records[0].source_path == dir / "go_000.motion");
    CHECK(r.records[1].split == m.records[1].split);
    CHECK(r.seed == 1u);

    std::ofstream(dir / "bare.json") << R"([{"clip_id":"x","gloss":"go","source_path":"/abs/x.motion","frame_count":4}])";
    const auto bare = read_manifest(dir / "bare.json");
    CHECK(bare.records.at(0).source_path == "/abs/x.motion");
    CHECK(bare.records.at(0).split == Split::unassigned);

    std::ofstream(dir / "qc.json") << R"({"x": {"keep_start": 0, "keep_end": 3, "reason": "trailing_noise"}})";
    CHECK(read_qc_sidecar(dir / "qc.json").at("x").reason == QcReason::trailing_noise);
    std::ofstream(dir / "bad_qc.json") << R"({"x": {"keep_start": 0}})";
    CHECK(error_code_of([&] { read_qc_sidecar(dir / "bad_qc.json"); }) == ErrorCode::invalid_annotation);
    std::ofstream(dir / "broken.json") << "{";
    CHECK(error_code_of([&] { read_manifest(dir / "broken.json"); }) == ErrorCode::format);
}

TEST_CASE("prepare_dataset curates, trims and splits") {
    testutil::TempDir dir("prepare");
    DatasetManifest m;
    for (int i = 0; i < 10; ++i) m.records.push_back(write_clip(dir.path, "drink_" + std::to_string(i), "drink", 12, i));
    for (int i = 0; i < 6; ++i) m.records.push_back(write_clip(dir.path, "go_" + std::to_string(i), "go", 12, 50 + i));
    for (int i = 0; i < 2; ++i) m.records.push_back(write_clip(dir.path, "rare_" + std::to_string(i), "rare", 12, 90 + i));
    const std::map<std::string, QcAnnotation> qc = {{"drink_3", {0, 7, QcReason::trailing_noise}}};

    PrepareOptions opts;
    opts.min_samples = 5;
    const auto out = dir / "out";
    const PrepareSummary s = prepare_dataset(m, qc, opts, out);
    CHECK(s.words == 2);
    CHECK(s.train == 8 + 4);
    CHECK(s.test == 2 + 2);
    CHECK(s.trimmed == 1);

    const auto back = read_manifest(out / "manifest.json");
    CHECK(back.records.size() == 16u);
    for (const auto& r : back.records) {
        const Motion c = read_container(r.source_path);
        CHECK(c.gloss() == r.gloss);
        CHECK(c.frame_count() == r.frame_count);
        CHECK(r.source_path.parent_path().filename() == to_string(r.split));
        if (r.clip_id == "drink_3") CHECK(r.frame_count == 7);
    }

    const std::map<std::string, QcAnnotation> bad = {{"go_2", {0, 40, QcReason::none}}};
    const std::string msg = testutil::error_message_of([&] { prepare_dataset(m, bad, opts, dir / "out2"); });
    CHECK(msg.find("go_2") != std::string::npos);
    CHECK(error_code_of([&] { prepare_dataset(m, bad, opts, dir / "out2"); }) == ErrorCode::invalid_annotation);
}

TEST_CASE("real dataset figures when a manifest is supplied") {
    const char* path = std::getenv("SIGNMOTION_REAL_MANIFEST");
    if (path == nullptr || *path == '\0') {
        MESSAGE("SIGNMOTION_REAL_MANIFEST not set; skipping real-data figures");
        return;
    }
    const DatasetManifest m = read_manifest(path);
    const auto words = filter_by_min_samples(m.word_counts(), 18);
    CHECK(words.size() == 103u);
    const auto split = make_split(restrict_to_words(m, {words.begin(), words.end()}), 0.8, 0);
    CHECK(split.with_split(Split::train).size() == 1208u);
    CHECK(split.with_split(Split::test).size() == 339u);
}
