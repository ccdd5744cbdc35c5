#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "signmotion/dataset/dataset.hpp"
#include "signmotion/motion/motion.hpp"

namespace signmotion {

// Procedural stand-in for extracted signing clips: each word is a distinct
// periodic pattern over arm and hand joints, each sample a jittered copy.
struct ToyDataConfig {
    std::vector<std::string> words = {"book", "drink", "go", "help", "thanks"};
    int samples_per_word = 8;
    int frames = 30;
    double fps = 30.0;
    double amplitude_jitter = 0.15;
    double phase_jitter = 0.35;
    double noise = 0.02;
    std::uint64_t seed = 0;
};

struct ToySample {
    std::string clip_id;
    Motion motion;  // upper-pose layout, sixd channels
};

std::vector<ToySample> make_toy_dataset(const ToyDataConfig& config);

// Writes <dir>/clips/<clip>.motion in axis-angle plus <dir>/manifest.json.
DatasetManifest write_toy_dataset(const ToyDataConfig& config, const std::filesystem::path& dir);

}  // namespace signmotion
