#include "proxpose/layout.hpp"

#include <algorithm>
#include <mutex>

namespace proxpose {

const char* to_string(Group g) {
    switch (g) {
    case Group::body: return "body";
    case Group::hand: return "hand";
    case Group::face: return "face";
    }
    return "?";
}

Group group_from_string(const std::string& name) {
    if (name == "body") return Group::body;
    if (name == "hand") return Group::hand;
    if (name == "face") return Group::face;
    throw ConfigError("unknown keypoint group '" + name + "'");
}

std::vector<int> KeypointLayout::group_indices(Group g) const {
    auto it = group_ranges.find(g);
    if (it == group_ranges.end())
        throw ConfigError("layout '" + name + "' has no '" +
                          std::string(to_string(g)) + "' group");
    std::vector<int> out;
    for (const auto& r : it->second)
        for (int i = r.begin; i < r.end; ++i) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> KeypointLayout::indices_for(const std::string& key) const {
    auto sub = subranges.find(key);
    if (sub != subranges.end()) {
        std::vector<int> out;
        for (int i = sub->second.begin; i < sub->second.end; ++i) out.push_back(i);
        return out;
    }
    return group_indices(group_from_string(key));
}

std::vector<Group> KeypointLayout::groups_in_order() const {
    std::vector<std::pair<int, Group>> firsts;
    for (const auto& [g, ranges] : group_ranges) {
        int first = total;
        for (const auto& r : ranges) first = std::min(first, r.begin);
        firsts.emplace_back(first, g);
    }
    std::sort(firsts.begin(), firsts.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Group> out;
    for (const auto& [_, g] : firsts) out.push_back(g);
    return out;
}

int KeypointLayout::joint(const std::string& jname) const {
    auto it = body_joints.find(jname);
    if (it == body_joints.end())
        throw ConfigError("layout '" + name + "' does not define joint '" + jname + "'");
    return it->second;
}

void KeypointLayout::validate() const {
    std::vector<char> covered(static_cast<size_t>(total), 0);
    for (const auto& [g, ranges] : group_ranges) {
        for (const auto& r : ranges) {
            if (r.begin < 0 || r.end > total || r.begin >= r.end)
                throw ConfigError("layout '" + name + "': bad range in group " +
                                  to_string(g));
            for (int i = r.begin; i < r.end; ++i) {
                if (covered[static_cast<size_t>(i)])
                    throw ConfigError("layout '" + name + "': overlapping group ranges");
                covered[static_cast<size_t>(i)] = 1;
            }
        }
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end())
        throw ConfigError("layout '" + name + "': group ranges do not cover all indices");

    if (has_group(Group::body)) {
        auto body = group_indices(Group::body);
        for (int h : head_indices)
            if (!std::binary_search(body.begin(), body.end(), h))
                throw ConfigError("layout '" + name + "': head index outside body group");
    } else if (!head_indices.empty()) {
        throw ConfigError("layout '" + name + "': head indices without a body group");
    }
    for (const auto& [a, b] : skeleton)
        if (a < 0 || a >= total || b < 0 || b >= total)
            throw ConfigError("layout '" + name + "': skeleton index out of range");
}

namespace {

// Joint order shared by COCO-17, the COCO-WholeBody body block, and the
// Halpe body block (indices 0..16 coincide across the three conventions).
void add_standard_body_joints(KeypointLayout& l) {
    l.body_joints = {
        {"nose", 0},       {"l_eye", 1},      {"r_eye", 2},
        {"l_ear", 3},      {"r_ear", 4},      {"l_shoulder", 5},
        {"r_shoulder", 6}, {"l_elbow", 7},    {"r_elbow", 8},
        {"l_wrist", 9},    {"r_wrist", 10},   {"l_hip", 11},
        {"r_hip", 12},     {"l_knee", 13},    {"r_knee", 14},
        {"l_ankle", 15},   {"r_ankle", 16},
    };
}

std::vector<std::pair<int, int>> standard_body_skeleton() {
    return {{15, 13}, {13, 11}, {16, 14}, {14, 12}, {11, 12}, {5, 11},
            {6, 12},  {5, 6},   {5, 7},   {6, 8},   {7, 9},   {8, 10},
            {1, 2},   {0, 1},   {0, 2},   {1, 3},   {2, 4},   {3, 5},
            {4, 6}};
}

// 21-keypoint hand: wrist + 4 joints per finger.
std::vector<std::pair<int, int>> hand_skeleton(int base) {
    std::vector<std::pair<int, int>> edges;
    for (int f = 0; f < 5; ++f) {
        int root = base;
        for (int j = 0; j < 4; ++j) {
            int idx = base + 1 + f * 4 + j;
            edges.emplace_back(root, idx);
            root = idx;
        }
    }
    return edges;
}

KeypointLayout make_coco17() {
    KeypointLayout l;
    l.name = "coco17";
    l.total = 17;
    l.group_ranges[Group::body] = {{0, 17}};
    l.head_indices = {0, 1, 2, 3, 4};
    l.skeleton = standard_body_skeleton();
    add_standard_body_joints(l);
    return l;
}

KeypointLayout make_coco_wholebody133() {
    KeypointLayout l;
    l.name = "coco_wholebody133";
    l.total = 133;
    // 17 body + 6 foot, 68 face, 21 + 21 hand.
    l.group_ranges[Group::body] = {{0, 23}};
    l.group_ranges[Group::face] = {{23, 91}};
    l.group_ranges[Group::hand] = {{91, 133}};
    l.head_indices = {0, 1, 2, 3, 4};
    l.skeleton = standard_body_skeleton();
    auto lh = hand_skeleton(91), rh = hand_skeleton(112);
    l.skeleton.insert(l.skeleton.end(), lh.begin(), lh.end());
    l.skeleton.insert(l.skeleton.end(), rh.begin(), rh.end());
    add_standard_body_joints(l);
    l.subranges["left_hand"] = {91, 112};
    l.subranges["right_hand"] = {112, 133};
    return l;
}

KeypointLayout make_halpe136() {
    KeypointLayout l;
    l.name = "halpe136";
    l.total = 136;
    // 17 body + head/neck/hip + 6 foot, 68 face, 21 + 21 hand.
    l.group_ranges[Group::body] = {{0, 26}};
    l.group_ranges[Group::face] = {{26, 94}};
    l.group_ranges[Group::hand] = {{94, 136}};
    l.head_indices = {0, 1, 2, 3, 4, 17};
    l.skeleton = standard_body_skeleton();
    l.skeleton.insert(l.skeleton.end(), {{17, 18}, {18, 19}, {19, 11}, {19, 12}});
    auto lh = hand_skeleton(94), rh = hand_skeleton(115);
    l.skeleton.insert(l.skeleton.end(), lh.begin(), lh.end());
    l.skeleton.insert(l.skeleton.end(), rh.begin(), rh.end());
    add_standard_body_joints(l);
    l.body_joints["head"] = 17;
    l.body_joints["neck"] = 18;
    l.body_joints["hip"] = 19;
    l.subranges["left_hand"] = {94, 115};
    l.subranges["right_hand"] = {115, 136};
    return l;
}

KeypointLayout make_hand21() {
    KeypointLayout l;
    l.name = "hand21";
    l.total = 21;
    l.group_ranges[Group::hand] = {{0, 21}};
    l.skeleton = hand_skeleton(0);
    return l;
}

const std::map<std::string, KeypointLayout>& all_layouts() {
    static std::map<std::string, KeypointLayout> reg = [] {
        std::map<std::string, KeypointLayout> m;
        for (auto&& l : {make_coco17(), make_coco_wholebody133(), make_halpe136(),
                         make_hand21()}) {
            l.validate();
            m.emplace(l.name, std::move(l));
        }
        return m;
    }();
    return reg;
}

} // namespace

const KeypointLayout& layout_registry(const std::string& name) {
    const auto& reg = all_layouts();
    auto it = reg.find(name);
    if (it == reg.end()) throw ConfigError("unknown layout '" + name + "'");
    return it->second;
}

std::vector<std::string> registered_layout_names() {
    std::vector<std::string> names;
    for (const auto& [n, _] : all_layouts()) names.push_back(n);
    return names;
}

} // namespace proxpose
