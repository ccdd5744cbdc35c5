#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace signmotion {

enum class Channels { axis_angle, matrix, sixd };

int channel_width(Channels c);
std::string_view to_string(Channels c);
Channels channels_from_string(std::string_view s);

// Ordered kinematic tree.  Parents precede children; roots use -1.
class JointLayout {
public:
    JointLayout(std::string name, std::vector<std::string> joints, std::vector<int> parent_index);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& joints() const { return joints_; }
    const std::vector<int>& parent_index() const { return parents_; }
    int size() const { return static_cast<int>(joints_.size()); }
    int index_of(std::string_view joint) const;  // -1 when absent

    bool operator==(const JointLayout& other) const = default;

private:
    std::string name_;
    std::vector<std::string> joints_;
    std::vector<int> parents_;
};

// Global orient + 21 SMPL-X body joints + 15 joints per hand (52 joints).
const JointLayout& upper_pose_layout();

// Full SMPL-X pose: 22 body joints, jaw, two eyes, 30 hand joints (55 joints).
const JointLayout& smplx_full_layout();

// Names of the lower-body joints that upstream signing data does not track.
const std::vector<std::string>& lower_body_joints();

// Registry lookup for layout names found in container headers.
const JointLayout& layout_by_name(std::string_view name);
void register_layout(const JointLayout& layout);

}  // namespace signmotion
