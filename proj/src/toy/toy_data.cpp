#include "signmotion/toy/toy_data.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "signmotion/common/error.hpp"
#include "signmotion/common/rng.hpp"
#include "signmotion/dataset/manifest_io.hpp"
#include "signmotion/motion/container.hpp"

namespace signmotion {

namespace {

// Collar, shoulder, elbow and wrist joints of both arms.
constexpr int kArmJoints[] = {13, 14, 16, 17, 18, 19, 20, 21};
constexpr int kFirstHandJoint = 22;
constexpr int kHandJoints = 30;

struct WordPattern {
    double frequency = 1.0;
    std::vector<int> joints;
    std::vector<Eigen::Vector3d> amplitude, phase, offset;
};

WordPattern word_pattern(std::size_t word, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x746f79, word));
    WordPattern p;
    p.frequency = 0.5 + 0.5 * static_cast<double>(word % 4);
    for (int j : kArmJoints) p.joints.push_back(j);
    for (int j = 0; j < kHandJoints; ++j)
        if (rng.uniform01() < 0.5) p.joints.push_back(kFirstHandJoint + j);
    for (std::size_t k = 0; k < p.joints.size(); ++k) {
        Eigen::Vector3d a, ph, off;
        for (int c = 0; c < 3; ++c) {
            a[c] = rng.uniform(-0.9, 0.9);
            ph[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
            off[c] = rng.uniform(-0.4, 0.4);
        }
        p.amplitude.push_back(a);
        p.phase.push_back(ph);
        p.offset.push_back(off);
    }
    return p;
}

Motion toy_axis_angle(const WordPattern& p, const ToyDataConfig& c, const std::string& word, Rng& rng) {
    const JointLayout& layout = upper_pose_layout();
    FrameMatrix frames = FrameMatrix::Zero(c.frames, layout.size() * 3);
    const double scale = 1.0 + rng.uniform(-c.amplitude_jitter, c.amplitude_jitter);
    const double shift = rng.uniform(-c.phase_jitter, c.phase_jitter);
    for (int t = 0; t < c.frames; ++t) {
        const double tau = 2.0 * std::numbers::pi * p.frequency * t / c.frames + shift;
        for (std::size_t k = 0; k < p.joints.size(); ++k)
            for (int a = 0; a < 3; ++a) {
                const double v = p.offset[k][a] + scale * p.amplitude[k][a] * std::sin(tau + p.phase[k][a]);
                frames(t, 3 * p.joints[k] + a) = static_cast<float>(v + c.noise * rng.normal());
            }
    }
    return Motion(layout, Channels::axis_angle, std::move(frames), c.fps, word);
}

}  // namespace

std::vector<ToySample> make_toy_dataset(const ToyDataConfig& config) {
    require(!config.words.empty() && config.samples_per_word >= 1 && config.frames >= 1, ErrorCode::invalid_argument,
            "toy dataset needs words, samples and frames");
    std::vector<ToySample> out;
    for (std::size_t w = 0; w < config.words.size(); ++w) {
        const WordPattern pattern = word_pattern(w, config.seed);
        for (int s = 0; s < config.samples_per_word; ++s) {
            Rng rng(mix_seed(config.seed, 0x73616d, w, static_cast<std::uint64_t>(s)));
            char id[128];
            std::snprintf(id, sizeof id, "%s_%03d", config.words[w].c_str(), s);
            out.push_back({id, convert_channels(toy_axis_angle(pattern, config, config.words[w], rng), Channels::sixd)});
        }
    }
    return out;
}

DatasetManifest write_toy_dataset(const ToyDataConfig& config, const std::filesystem::path& dir) {
    DatasetManifest manifest;
    manifest.seed = config.seed;
    for (const auto& s : make_toy_dataset(config)) {
        const std::filesystem::path rel = std::filesystem::path("clips") / (s.clip_id + ".motion");
        write_container(convert_channels(s.motion, Channels::axis_angle), dir / rel);
        manifest.records.push_back({s.clip_id, *s.motion.gloss(), rel, s.motion.frame_count(), std::nullopt,
                                    Split::unassigned});
    }
    write_manifest(manifest, dir / "manifest.json");
    for (auto& r : manifest.records) r.source_path = dir / r.source_path;
    return manifest;
}

}  // namespace signmotion
