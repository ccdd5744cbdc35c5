#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "signmotion/motion/motion.hpp"
#include "signmotion/nn/graph.hpp"
#include "signmotion/nn/layers.hpp"

namespace signmotion {

// Kinematic tree of a layout as a graph; nodes carry 6D rotations.
struct SkeletonGraph {
    std::string layout;
    int nodes = 0;
    std::vector<std::pair<int, int>> edges;  // (child, parent)
    int channel_width = 6;

    static SkeletonGraph from_layout(const JointLayout& layout);

    // Symmetric normalized adjacency with self loops, D^-1/2 (A + I) D^-1/2.
    nn::JointMixer normalized_adjacency() const;
};

struct ClassifierConfig {
    int frames = 60;
    int hidden1 = 16;
    int hidden2 = 32;
    int feature_dim = 32;
    int epochs = 60;
    int batch_size = 8;
    double learning_rate = 3e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

// Spatio-temporal graph convolution classifier.  Each block mixes joints
// along the skeleton, applies a width-3 temporal convolution and halves the
// frame rate; the pooled embedding feeds a feature layer and the logits.
class MotionClassifier {
public:
    MotionClassifier() = default;

    // Labels are class names; classes are their sorted unique set.
    static MotionClassifier train(const std::vector<Motion>& motions, const std::vector<std::string>& labels,
                                  const ClassifierConfig& config);

    bool ready() const { return !classes_.empty(); }
    const std::vector<std::string>& classes() const { return classes_; }
    const ClassifierConfig& config() const { return config_; }
    const std::string& layout_name() const { return graph_.layout; }

    Eigen::VectorXd logits(const Motion& motion) const;
    Eigen::VectorXd features(const Motion& motion) const;
    // Argmax of the logits; the lowest index wins ties.
    int predict(const Motion& motion) const;
    const std::string& predict_label(const Motion& motion) const;

    void save(const std::filesystem::path& path) const;
    static MotionClassifier load(const std::filesystem::path& path);

private:
    struct Block {
        nn::Linear spatial;
        int t_prev = -1, t_next = -1;  // temporal taps; the centre tap is `spatial`
    };
    struct Outputs {
        nn::Var features, logits;
    };

    void build(Rng& rng);
    nn::Matrix prepare(const Motion& motion) const;
    Outputs forward(nn::Graph& g, const nn::Matrix& input) const;

    ClassifierConfig config_;
    SkeletonGraph graph_;
    nn::JointMixer mixer_;
    std::vector<std::string> classes_;
    nn::ParameterSet params_;
    Block block1_, block2_;
    nn::Linear feature_, head_;
};

int argmax_lowest(const Eigen::VectorXd& scores);
double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels);
// Labels absent from the classifier's classes count as misses.
double accuracy(const MotionClassifier& classifier, const std::vector<Motion>& motions,
                const std::vector<std::string>& labels);

}  // namespace signmotion
