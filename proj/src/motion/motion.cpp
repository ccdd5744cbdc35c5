#include "signmotion/motion/motion.hpp"

#include <algorithm>
#include <cmath>

#include "signmotion/common/error.hpp"
#include "signmotion/motion/rotation.hpp"

namespace signmotion {

Motion::Motion(JointLayout layout, Channels channels, FrameMatrix frames, double fps,
               std::optional<std::string> gloss)
    : layout_(std::move(layout)), channels_(channels), frames_(std::move(frames)), fps_(fps),
      gloss_(std::move(gloss)) {
    require(frames_.rows() >= 1, ErrorCode::invalid_argument, "motion must have at least one frame");
    const int width = layout_.size() * channel_width(channels_);
    require(frames_.cols() == width, ErrorCode::shape,
            "motion frame width " + std::to_string(frames_.cols()) + " does not match layout '" +
                layout_.name() + "' x " + std::string(to_string(channels_)) + " = " + std::to_string(width));
    require(std::isfinite(fps_) && fps_ > 0, ErrorCode::invalid_argument, "motion fps must be positive");
    require(frames_.allFinite(), ErrorCode::invalid_argument, "motion contains non-finite values");
    if (channels_ == Channels::sixd) {
        for (Eigen::Index t = 0; t < frames_.rows(); ++t) {
            for (int j = 0; j < layout_.size(); ++j) {
                const float n = frames_.row(t).segment(6 * j, 3).norm();
                require(n > 1e-8f, ErrorCode::degenerate_input,
                        "sixd frame " + std::to_string(t) + " joint " + std::to_string(j) +
                            " has a zero first vector");
            }
        }
    }
}

Motion Motion::slice(int begin, int end) const {
    require(begin >= 0 && begin < end && end <= frame_count(), ErrorCode::invalid_argument,
            "motion slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range");
    return Motion(layout_, channels_, frames_.middleRows(begin, end - begin), fps_, gloss_);
}

bool Motion::operator==(const Motion& other) const {
    return layout_ == other.layout_ && channels_ == other.channels_ && fps_ == other.fps_ &&
           gloss_ == other.gloss_ && frames_.rows() == other.frames_.rows() &&
           frames_.cols() == other.frames_.cols() && frames_ == other.frames_;
}

namespace {

Mat3 joint_matrix(const FrameMatrix& frames, Eigen::Index t, int j, Channels c) {
    switch (c) {
        case Channels::axis_angle:
            return axis_angle_to_matrix(frames.row(t).segment(3 * j, 3).transpose().cast<double>());
        case Channels::sixd:
            return sixd_to_matrix(frames.row(t).segment(6 * j, 6).transpose().cast<double>());
        case Channels::matrix: {
            Mat3 r;
            for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = frames(t, 9 * j + k);
            return r;
        }
    }
    return Mat3::Identity();
}

void store_joint(FrameMatrix& frames, Eigen::Index t, int j, Channels c, const Mat3& r) {
    switch (c) {
        case Channels::axis_angle:
            frames.row(t).segment(3 * j, 3) = matrix_to_axis_angle(r).transpose().cast<float>();
            break;
        case Channels::sixd: {
            Vec6 s;
            s << r.col(0), r.col(1);
            frames.row(t).segment(6 * j, 6) = s.transpose().cast<float>();
            break;
        }
        case Channels::matrix:
            for (int k = 0; k < 9; ++k) frames(t, 9 * j + k) = static_cast<float>(r(k / 3, k % 3));
            break;
    }
}

// Re-orthonormalize float-rounded matrices before the log map.
Mat3 project_rotation(const Mat3& r) {
    Vec6 s;
    s << r.col(0), r.col(1);
    return sixd_to_matrix(s);
}

}  // namespace

Motion convert_channels(const Motion& motion, Channels target) {
    if (motion.channels() == target) return motion;
    const int joints = motion.layout().size();
    FrameMatrix out(motion.frame_count(), joints * channel_width(target));
    for (int t = 0; t < motion.frame_count(); ++t) {
        for (int j = 0; j < joints; ++j) {
            Mat3 r = joint_matrix(motion.frames(), t, j, motion.channels());
            if (motion.channels() == Channels::matrix) r = project_rotation(r);
            store_joint(out, t, j, target, r);
        }
    }
    return Motion(motion.layout(), target, std::move(out), motion.fps(), motion.gloss());
}

Motion resample(const Motion& motion, int frames) {
    require(frames >= 1, ErrorCode::invalid_argument, "resample: target frame count must be positive");
    const int src = motion.frame_count();
    if (src == frames) return motion;
    FrameMatrix out(frames, motion.frame_width());
    for (int t = 0; t < frames; ++t) {
        const double pos = frames == 1 ? 0.0 : static_cast<double>(t) * (src - 1) / (frames - 1);
        const int lo = std::min(static_cast<int>(std::floor(pos)), src - 1);
        const int hi = std::min(lo + 1, src - 1);
        const float w = static_cast<float>(pos - lo);
        out.row(t) = (1.0f - w) * motion.frames().row(lo) + w * motion.frames().row(hi);
    }
    const double fps = motion.fps() * static_cast<double>(frames) / src;
    return Motion(motion.layout(), motion.channels(), std::move(out), fps, motion.gloss());
}

Motion complete_full_body(const Motion& motion) {
    const Motion aa = convert_channels(motion, Channels::axis_angle);
    const JointLayout& full = smplx_full_layout();
    FrameMatrix out = FrameMatrix::Zero(aa.frame_count(), 3 * full.size());
    const auto& lower = lower_body_joints();
    for (int j = 0; j < aa.layout().size(); ++j) {
        const std::string& name = aa.layout().joints()[j];
        if (std::find(lower.begin(), lower.end(), name) != lower.end()) continue;
        const int dst = full.index_of(name);
        require(dst >= 0, ErrorCode::shape, "joint '" + name + "' is not part of the SMPL-X layout");
        out.middleCols(3 * dst, 3) = aa.frames().middleCols(3 * j, 3);
    }
    return Motion(full, Channels::axis_angle, std::move(out), aa.fps(), aa.gloss());
}

}  // namespace signmotion
