#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "proxpose/errors.hpp"

namespace proxpose {

enum class Group { body, hand, face };

const char* to_string(Group g);
Group group_from_string(const std::string& name);

// Half-open index interval [begin, end).
struct IndexRange {
    int begin = 0;
    int end = 0;
    int size() const { return end - begin; }
};

// Describes one keypoint convention: how many keypoints, which index ranges
// form the body/hand/face groups, which body indices belong to the head, and
// the limb connectivity. Layouts are immutable once built and shareable
// across threads.
struct KeypointLayout {
    std::string name;
    int total = 0;
    std::map<Group, std::vector<IndexRange>> group_ranges;
    std::vector<int> head_indices;
    std::vector<std::pair<int, int>> skeleton;
    // Semantic body joints (l_shoulder, r_wrist, ...) where the layout
    // defines them; used for visibility categories and shoulder exclusion.
    std::map<std::string, int> body_joints;
    // Named sub-ranges (left_hand / right_hand) for per-hand evaluation.
    std::map<std::string, IndexRange> subranges;

    bool has_group(Group g) const { return group_ranges.count(g) > 0; }

    // Flat, ascending index list for a group.
    std::vector<int> group_indices(Group g) const;

    // Indices for either a group name or a named sub-range.
    std::vector<int> indices_for(const std::string& group_or_subrange) const;

    // Groups ordered by their first index; concatenating their ranges
    // covers [0, total) exactly.
    std::vector<Group> groups_in_order() const;

    int joint(const std::string& name) const; // throws ConfigError if absent
    bool has_joint(const std::string& name) const { return body_joints.count(name) > 0; }

    // Checks the structural invariants (disjoint ranges covering [0, total),
    // head indices inside the body group). Throws ConfigError on violation.
    void validate() const;
};

// Built-in layouts: "coco17", "coco_wholebody133", "halpe136", "hand21".
const KeypointLayout& layout_registry(const std::string& name);
std::vector<std::string> registered_layout_names();

} // namespace proxpose
