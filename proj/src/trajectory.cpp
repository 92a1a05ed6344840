#include "proxpose/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "proxpose/annotations.hpp"

namespace proxpose {

namespace {

double sorted_median(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

void Trajectory::validate() const {
    for (size_t i = 1; i < frames.size(); ++i)
        if (frames[i].t < frames[i - 1].t)
            throw ConfigError("trajectory: timestamps must be non-decreasing");
}

void MocapTrack::validate() const {
    for (size_t i = 1; i < frames.size(); ++i)
        if (frames[i].t < frames[i - 1].t)
            throw ConfigError("mocap track: timestamps must be non-decreasing");
}

void MarkerPairing::validate() const {
    for (const auto& [kp, markers] : pairs)
        if (markers.first == markers.second)
            throw ConfigError("marker pairing for keypoint " + std::to_string(kp) +
                              " repeats marker '" + markers.first + "'");
}

void DistanceBins::validate() const {
    if (thresholds.empty()) throw ConfigError("distance bins: empty threshold list");
    for (size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0)) throw ConfigError("distance bins: non-positive bin");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
            throw ConfigError("distance bins: thresholds must be strictly increasing");
    }
}

Trajectory parse_trajectory(const std::string& text, const std::string& frame) {
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            Trajectory::Frame fr;
            fr.t = j.at("t").get<double>();
            for (const auto& [key, val] : j.at("keypoints").items()) {
                const auto arr = val.get<std::vector<double>>();
                if (arr.size() != 4)
                    throw ParseError("trajectory line " + std::to_string(lineno) +
                                     ": keypoint needs [x,y,z,conf]");
                const int idx = std::stoi(key);
                fr.keypoints[idx] = {Point3{arr[0], arr[1], arr[2], frame}, arr[3]};
            }
            traj.frames.push_back(std::move(fr));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("trajectory line " + std::to_string(lineno) + ": " + e.what());
        } catch (const std::invalid_argument&) {
            throw ParseError("trajectory line " + std::to_string(lineno) +
                             ": keypoint index is not an integer");
        }
    }
    traj.validate();
    return traj;
}

std::string write_trajectory(const Trajectory& traj) {
    std::string out;
    for (const auto& fr : traj.frames) {
        nlohmann::json j;
        j["t"] = fr.t;
        nlohmann::json kps = nlohmann::json::object();
        for (const auto& [idx, obs] : fr.keypoints)
            kps[std::to_string(idx)] = {obs.first.x, obs.first.y, obs.first.z, obs.second};
        j["keypoints"] = std::move(kps);
        out += j.dump();
        out += '\n';
    }
    return out;
}

Trajectory load_trajectory(const std::string& path, const std::string& frame) {
    return parse_trajectory(read_file(path), frame);
}

MocapTrack parse_mocap_csv(const std::string& text, const std::string& frame) {
    MocapTrack track;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            std::string squashed;
            for (char c : line)
                if (!std::isspace(static_cast<unsigned char>(c))) squashed += c;
            if (squashed != "t,marker_id,x,y,z")
                throw ParseError("mocap csv: expected header 't,marker_id,x,y,z'");
            header_seen = true;
            continue;
        }
        std::istringstream ls(line);
        std::string t_s, id, x_s, y_s, z_s;
        if (!std::getline(ls, t_s, ',') || !std::getline(ls, id, ',') ||
            !std::getline(ls, x_s, ',') || !std::getline(ls, y_s, ',') ||
            !std::getline(ls, z_s, ','))
            throw ParseError("mocap csv line " + std::to_string(lineno) +
                             ": expected 5 comma-separated fields");
        double t, x, y, z;
        try {
            t = std::stod(t_s);
            x = std::stod(x_s);
            y = std::stod(y_s);
            z = std::stod(z_s);
        } catch (const std::exception&) {
            throw ParseError("mocap csv line " + std::to_string(lineno) + ": bad number");
        }
        if (track.frames.empty() || track.frames.back().t != t) {
            MocapTrack::Frame fr;
            fr.t = t;
            track.frames.push_back(std::move(fr));
        }
        track.frames.back().markers[id] = Point3{x, y, z, frame};
    }
    if (!header_seen) throw ParseError("mocap csv: missing header");
    track.validate();
    return track;
}

MocapTrack load_mocap_csv(const std::string& path, const std::string& frame) {
    return parse_mocap_csv(read_file(path), frame);
}

MarkerPairing parse_marker_pairing(const std::string& document) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("marker pairing: ") + e.what());
    }
    MarkerPairing pairing;
    try {
        for (const auto& [key, val] : j.items()) {
            const auto arr = val.get<std::vector<std::string>>();
            if (arr.size() != 2)
                throw ParseError("marker pairing: keypoint " + key +
                                 " needs exactly 2 marker ids");
            pairing.pairs[std::stoi(key)] = {arr[0], arr[1]};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("marker pairing: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw ParseError("marker pairing: keypoint index is not an integer");
    }
    pairing.validate();
    return pairing;
}

MarkerPairing load_marker_pairing(const std::string& path) {
    return parse_marker_pairing(read_file(path));
}

Trajectory transform_trajectory(const Trajectory& traj, const RigidTransform& T) {
    Trajectory out = traj;
    for (auto& fr : out.frames)
        for (auto& [idx, obs] : fr.keypoints) obs.first = apply_rigid(obs.first, T);
    return out;
}

std::map<int, Point3> median_center(const Trajectory& traj, double conf_threshold) {
    std::map<int, std::array<std::vector<double>, 3>> samples;
    std::map<int, std::string> frames_of;
    for (const auto& fr : traj.frames) {
        for (const auto& [idx, obs] : fr.keypoints) {
            if (obs.second < conf_threshold) continue;
            samples[idx][0].push_back(obs.first.x);
            samples[idx][1].push_back(obs.first.y);
            samples[idx][2].push_back(obs.first.z);
            frames_of[idx] = obs.first.frame;
        }
    }
    std::map<int, Point3> centers;
    for (auto& [idx, comps] : samples) {
        centers[idx] = Point3{sorted_median(comps[0]), sorted_median(comps[1]),
                              sorted_median(comps[2]), frames_of[idx]};
    }
    return centers;
}

std::map<int, RelativeRow> relative_stats(const Trajectory& traj,
                                          const std::map<int, Point3>& centers,
                                          const DistanceBins& bins, double conf_threshold) {
    bins.validate();
    std::map<int, RelativeRow> rows;
    const long long total = static_cast<long long>(traj.frames.size());
    for (const auto& [idx, center] : centers) {
        RelativeRow row;
        row.frames_total = total;
        row.within.assign(bins.thresholds.size(), 0.0);
        std::vector<long long> hits(bins.thresholds.size(), 0);
        for (const auto& fr : traj.frames) {
            auto it = fr.keypoints.find(idx);
            if (it == fr.keypoints.end() || it->second.second < conf_threshold) continue;
            ++row.qualifying;
            const double d = distance(it->second.first, center);
            for (size_t b = 0; b < bins.thresholds.size(); ++b)
                if (d <= bins.thresholds[b]) ++hits[b];
        }
        if (row.qualifying > 0)
            for (size_t b = 0; b < bins.thresholds.size(); ++b)
                row.within[b] = static_cast<double>(hits[b]) / row.qualifying;
        row.detection_fraction =
            total > 0 ? static_cast<double>(row.qualifying) / total : 0.0;
        rows[idx] = std::move(row);
    }
    return rows;
}

Trajectory marker_ground_truth(const MocapTrack& mocap, const MarkerPairing& pairing) {
    pairing.validate();
    std::set<std::string> seen;
    for (const auto& fr : mocap.frames)
        for (const auto& [id, _] : fr.markers) seen.insert(id);
    for (const auto& [kp, markers] : pairing.pairs) {
        for (const std::string* id : {&markers.first, &markers.second})
            if (!seen.count(*id))
                throw ConfigError("marker pairing references unknown marker '" + *id + "'");
    }

    Trajectory traj;
    for (const auto& fr : mocap.frames) {
        Trajectory::Frame out;
        out.t = fr.t;
        for (const auto& [kp, markers] : pairing.pairs) {
            auto a = fr.markers.find(markers.first);
            auto b = fr.markers.find(markers.second);
            if (a == fr.markers.end() || b == fr.markers.end()) continue;
            if (a->second.frame != b->second.frame)
                throw FrameError("paired markers live in different frames");
            Point3 mid{0.5 * (a->second.x + b->second.x), 0.5 * (a->second.y + b->second.y),
                       0.5 * (a->second.z + b->second.z), a->second.frame};
            out.keypoints[kp] = {mid, 1.0};
        }
        traj.frames.push_back(std::move(out));
    }
    return traj;
}

TimeAssociation associate_by_time(const Trajectory& a, const Trajectory& b,
                                  double tolerance_s) {
    if (tolerance_s < 0.0) throw ConfigError("time association: negative tolerance");
    a.validate();
    b.validate();
    struct Candidate {
        double dt;
        size_t ia;
        size_t ib;
    };
    std::vector<Candidate> candidates;
    // b is sorted, so the in-tolerance window per a-frame comes from a
    // binary search rather than the full cross product.
    std::vector<double> tb;
    tb.reserve(b.frames.size());
    for (const auto& fr : b.frames) tb.push_back(fr.t);
    for (size_t ia = 0; ia < a.frames.size(); ++ia) {
        const double t = a.frames[ia].t;
        const auto lo = std::lower_bound(tb.begin(), tb.end(), t - tolerance_s);
        const auto hi = std::upper_bound(tb.begin(), tb.end(), t + tolerance_s);
        for (auto it = lo; it != hi; ++it)
            candidates.push_back({std::abs(*it - t), ia,
                                  static_cast<size_t>(it - tb.begin())});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        return std::tie(x.dt, x.ia, x.ib) < std::tie(y.dt, y.ia, y.ib);
    });

    TimeAssociation assoc;
    std::vector<char> used_a(a.frames.size(), 0), used_b(b.frames.size(), 0);
    for (const auto& c : candidates) {
        if (used_a[c.ia] || used_b[c.ib]) continue;
        used_a[c.ia] = 1;
        used_b[c.ib] = 1;
        assoc.pairs.emplace_back(c.ia, c.ib);
    }
    std::sort(assoc.pairs.begin(), assoc.pairs.end());
    assoc.dropped_a = static_cast<long long>(
        std::count(used_a.begin(), used_a.end(), 0));
    assoc.dropped_b = static_cast<long long>(
        std::count(used_b.begin(), used_b.end(), 0));
    return assoc;
}

std::vector<AbsoluteRow> absolute_stats(const Trajectory& detected, const Trajectory& gt,
                                        const TimeAssociation& assoc, const DistanceBins& bins,
                                        const std::vector<double>& conf_thresholds,
                                        const std::set<int>& keypoint_selection) {
    bins.validate();
    if (conf_thresholds.empty())
        throw ConfigError("absolute stats: empty confidence threshold list");

    std::set<int> keypoints = keypoint_selection;
    if (keypoints.empty())
        for (const auto& fr : gt.frames)
            for (const auto& [idx, _] : fr.keypoints) keypoints.insert(idx);

    std::vector<AbsoluteRow> rows;
    for (int kp : keypoints) {
        for (double conf : conf_thresholds) {
            AbsoluteRow row;
            row.keypoint = kp;
            row.conf_threshold = conf;
            std::vector<double> dists;
            for (const auto& [ia, ib] : assoc.pairs) {
                const auto& da = detected.frames[ia].keypoints;
                const auto& db = gt.frames[ib].keypoints;
                auto dit = da.find(kp);
                auto git = db.find(kp);
                if (dit == da.end() || git == db.end()) continue;
                if (dit->second.second < conf) continue;
                dists.push_back(distance(dit->second.first, git->second.first));
            }
            row.count = static_cast<long long>(dists.size());
            row.within.assign(bins.thresholds.size(), 0.0);
            if (!dists.empty()) {
                for (size_t b = 0; b < bins.thresholds.size(); ++b) {
                    long long n = 0;
                    for (double d : dists)
                        if (d <= bins.thresholds[b]) ++n;
                    row.within[b] = static_cast<double>(n) / dists.size();
                }
                row.median_m = sorted_median(dists);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace proxpose
