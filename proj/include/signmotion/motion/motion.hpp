#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "signmotion/motion/joint_layout.hpp"

namespace signmotion {

using FrameMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Time-ordered per-joint rotations: frames is T x (J * channel width).
class Motion {
public:
    Motion(JointLayout layout, Channels channels, FrameMatrix frames, double fps,
           std::optional<std::string> gloss = std::nullopt);

    const JointLayout& layout() const { return layout_; }
    Channels channels() const { return channels_; }
    const FrameMatrix& frames() const { return frames_; }
    double fps() const { return fps_; }
    const std::optional<std::string>& gloss() const { return gloss_; }
    int frame_count() const { return static_cast<int>(frames_.rows()); }
    int frame_width() const { return static_cast<int>(frames_.cols()); }

    void set_gloss(std::optional<std::string> gloss) { gloss_ = std::move(gloss); }

    // Frames [begin, end) as a new motion with the same metadata.
    Motion slice(int begin, int end) const;

    bool operator==(const Motion& other) const;

private:
    JointLayout layout_;
    Channels channels_;
    FrameMatrix frames_;
    double fps_;
    std::optional<std::string> gloss_;
};

// Re-express every joint rotation in the target parameterization.
Motion convert_channels(const Motion& motion, Channels target);

// Uniform linear resampling in time to a fixed frame count.
Motion resample(const Motion& motion, int frames);

// Expand an upper-pose motion to the full SMPL-X layout in axis-angle, with
// untracked joints (lower body, jaw, eyes) held at the rest pose.
Motion complete_full_body(const Motion& motion);

}  // namespace signmotion
