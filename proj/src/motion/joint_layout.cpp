#include "signmotion/motion/joint_layout.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "signmotion/common/error.hpp"

namespace signmotion {

int channel_width(Channels c) {
    switch (c) {
        case Channels::axis_angle: return 3;
        case Channels::matrix: return 9;
        case Channels::sixd: return 6;
    }
    return 0;
}

std::string_view to_string(Channels c) {
    switch (c) {
        case Channels::axis_angle: return "axis-angle";
        case Channels::matrix: return "matrix";
        case Channels::sixd: return "sixd";
    }
    return "";
}

Channels channels_from_string(std::string_view s) {
    if (s == "axis-angle") return Channels::axis_angle;
    if (s == "matrix") return Channels::matrix;
    if (s == "sixd") return Channels::sixd;
    fail(ErrorCode::format, "unknown channels tag '" + std::string(s) + "'");
}

JointLayout::JointLayout(std::string name, std::vector<std::string> joints, std::vector<int> parent_index)
    : name_(std::move(name)), joints_(std::move(joints)), parents_(std::move(parent_index)) {
    require(!joints_.empty(), ErrorCode::invalid_argument, "joint layout '" + name_ + "' has no joints");
    require(parents_.size() == joints_.size(), ErrorCode::invalid_argument,
            "joint layout '" + name_ + "': parent_index length differs from joints");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < joints_.size(); ++i) {
        require(seen.insert(joints_[i]).second, ErrorCode::invalid_argument,
                "joint layout '" + name_ + "': duplicate joint '" + joints_[i] + "'");
        const int p = parents_[i];
        require(p >= -1 && p < static_cast<int>(i), ErrorCode::invalid_argument,
                "joint layout '" + name_ + "': parent of '" + joints_[i] + "' must precede it");
    }
}

int JointLayout::index_of(std::string_view joint) const {
    auto it = std::find(joints_.begin(), joints_.end(), joint);
    return it == joints_.end() ? -1 : static_cast<int>(it - joints_.begin());
}

namespace {

const std::vector<std::string>& body_names() {
    static const std::vector<std::string> names = {
        "pelvis", "left_hip", "right_hip", "spine1", "left_knee", "right_knee",
        "spine2", "left_ankle", "right_ankle", "spine3", "left_foot", "right_foot",
        "neck", "left_collar", "right_collar", "head", "left_shoulder", "right_shoulder",
        "left_elbow", "right_elbow", "left_wrist", "right_wrist"};
    return names;
}

const std::vector<int>& body_parents() {
    static const std::vector<int> parents = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8,
                                             9, 9, 9, 12, 13, 14, 16, 17, 18, 19};
    return parents;
}

// Finger chains in SMPL-X order: index, middle, pinky, ring, thumb.
void append_hand(std::vector<std::string>& names, std::vector<int>& parents,
                 const std::string& side, int wrist) {
    static const char* fingers[] = {"index", "middle", "pinky", "ring", "thumb"};
    for (const char* f : fingers) {
        for (int k = 1; k <= 3; ++k) {
            names.push_back(side + "_" + f + std::to_string(k));
            parents.push_back(k == 1 ? wrist : static_cast<int>(names.size()) - 2);
        }
    }
}

JointLayout make_upper() {
    auto names = body_names();
    auto parents = body_parents();
    append_hand(names, parents, "left", 20);
    append_hand(names, parents, "right", 21);
    return JointLayout("smplx_upper52", std::move(names), std::move(parents));
}

JointLayout make_full() {
    auto names = body_names();
    auto parents = body_parents();
    names.insert(names.end(), {"jaw", "left_eye", "right_eye"});
    parents.insert(parents.end(), {15, 15, 15});
    append_hand(names, parents, "left", 20);
    append_hand(names, parents, "right", 21);
    return JointLayout("smplx_full55", std::move(names), std::move(parents));
}

struct Registry {
    Registry() {
        layouts.emplace(upper_pose_layout().name(), upper_pose_layout());
        layouts.emplace(smplx_full_layout().name(), smplx_full_layout());
    }
    std::mutex mutex;
    std::map<std::string, JointLayout, std::less<>> layouts;
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

const JointLayout& upper_pose_layout() {
    static const JointLayout layout = make_upper();
    return layout;
}

const JointLayout& smplx_full_layout() {
    static const JointLayout layout = make_full();
    return layout;
}

const std::vector<std::string>& lower_body_joints() {
    static const std::vector<std::string> names = {"left_hip", "right_hip", "left_knee", "right_knee",
                                                   "left_ankle", "right_ankle", "left_foot", "right_foot"};
    return names;
}

const JointLayout& layout_by_name(std::string_view name) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    auto it = reg.layouts.find(name);
    require(it != reg.layouts.end(), ErrorCode::format, "unknown joint layout '" + std::string(name) + "'");
    return it->second;
}

void register_layout(const JointLayout& layout) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    auto it = reg.layouts.find(layout.name());
    if (it != reg.layouts.end()) {
        require(it->second == layout, ErrorCode::invalid_argument,
                "layout '" + layout.name() + "' is already registered with a different definition");
        return;
    }
    reg.layouts.emplace(layout.name(), layout);
}

}  // namespace signmotion
