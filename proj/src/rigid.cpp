#include "proxpose/rigid.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "proxpose/annotations.hpp"

namespace proxpose {

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(rotation.transpose() * translation);
    inv.source = target;
    inv.target = source;
    return inv;
}

void RigidTransform::validate() const {
    const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() >= 1e-9)
        throw ConfigError("rigid transform: rotation is not orthonormal");
    if (rotation.determinant() <= 0.0)
        throw ConfigError("rigid transform: rotation determinant is not +1");
    if (!translation.allFinite() || !rotation.allFinite())
        throw ConfigError("rigid transform: non-finite entries");
}

Point3 apply_rigid(const Point3& p, const RigidTransform& T) {
    if (p.frame != T.source)
        throw FrameError("point in frame '" + p.frame + "' cannot be mapped by transform " +
                         T.source + "->" + T.target);
    const Eigen::Vector3d q = T.rotation * Eigen::Vector3d(p.x, p.y, p.z) + T.translation;
    return Point3{q.x(), q.y(), q.z(), T.target};
}

RigidTransform estimate_rigid(const CorrespondenceSet& corr, const std::string& source,
                              const std::string& target) {
    const size_t n = corr.pairs.size();
    if (n < 3)
        throw EmptyResultError("rigid estimation needs at least 3 correspondences, got " +
                               std::to_string(n));

    Eigen::Vector3d src_centroid = Eigen::Vector3d::Zero();
    Eigen::Vector3d tgt_centroid = Eigen::Vector3d::Zero();
    for (const auto& [p, q] : corr.pairs) {
        src_centroid += p;
        tgt_centroid += q;
    }
    src_centroid /= static_cast<double>(n);
    tgt_centroid /= static_cast<double>(n);

    Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
    double src_spread = 0.0;
    for (const auto& [p, q] : corr.pairs) {
        cross += (p - src_centroid) * (q - tgt_centroid).transpose();
        src_spread += (p - src_centroid).squaredNorm();
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    // Collinear (or coincident) source points leave the rotation about the
    // line undetermined: the cross-covariance drops below rank 2.
    if (!(sv(1) > 1e-12 * std::max(sv(0), src_spread)))
        throw ConfigError("rigid estimation: correspondences are collinear or degenerate");

    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant();
    RigidTransform T;
    T.rotation = svd.matrixV() * d * svd.matrixU().transpose();
    T.translation = tgt_centroid - T.rotation * src_centroid;
    T.source = source;
    T.target = target;
    T.validate();
    return T;
}

RigidTransform fix_translation(const RigidTransform& T, const Point3& anchor) {
    if (anchor.frame != T.target)
        throw FrameError("anchor frame '" + anchor.frame + "' does not match transform target '" +
                         T.target + "'");
    RigidTransform out = T;
    out.translation = Eigen::Vector3d(anchor.x, anchor.y, anchor.z);
    return out;
}

double residual_rms(const CorrespondenceSet& corr, const RigidTransform& T) {
    if (corr.pairs.empty())
        throw EmptyResultError("residual_rms over an empty correspondence set");
    double sum = 0.0;
    for (const auto& [p, q] : corr.pairs)
        sum += (T.rotation * p + T.translation - q).squaredNorm();
    return std::sqrt(sum / static_cast<double>(corr.pairs.size()));
}

CorrespondenceSet parse_correspondences(const std::string& text) {
    CorrespondenceSet corr;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double sx, sy, sz, tx, ty, tz;
        if (!(ls >> sx)) continue; // blank / comment-only line
        if (!(ls >> sy >> sz >> tx >> ty >> tz))
            throw ParseError("correspondences line " + std::to_string(lineno) +
                             ": expected 6 numbers");
        double trailing;
        if (ls >> trailing)
            throw ParseError("correspondences line " + std::to_string(lineno) +
                             ": trailing values");
        corr.pairs.emplace_back(Eigen::Vector3d(sx, sy, sz), Eigen::Vector3d(tx, ty, tz));
    }
    return corr;
}

CorrespondenceSet load_correspondences(const std::string& path) {
    return parse_correspondences(read_file(path));
}

RigidTransform parse_transform(const std::string& document) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("transform: ") + e.what());
    }
    RigidTransform T;
    try {
        if (j.contains("source")) T.source = j["source"].get<std::string>();
        if (j.contains("target")) T.target = j["target"].get<std::string>();
        if (j.contains("rotation")) {
            const auto r = j["rotation"].get<std::vector<double>>();
            if (r.size() != 9) throw ParseError("transform: 'rotation' needs 9 values");
            for (int i = 0; i < 3; ++i)
                for (int c = 0; c < 3; ++c) T.rotation(i, c) = r[static_cast<size_t>(3 * i + c)];
        } else if (j.contains("quaternion")) {
            const auto q = j["quaternion"].get<std::vector<double>>();
            if (q.size() != 4) throw ParseError("transform: 'quaternion' needs [w,x,y,z]");
            Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
            if (std::abs(quat.norm() - 1.0) > 1e-6)
                throw ParseError("transform: quaternion is not unit length");
            T.rotation = quat.normalized().toRotationMatrix();
        } else {
            throw ParseError("transform: missing 'rotation' or 'quaternion'");
        }
        const auto t = j.at("translation").get<std::vector<double>>();
        if (t.size() != 3) throw ParseError("transform: 'translation' needs 3 values");
        T.translation = Eigen::Vector3d(t[0], t[1], t[2]);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("transform: ") + e.what());
    }
    T.validate();
    return T;
}

std::string write_transform(const RigidTransform& T) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["source"] = T.source;
    j["target"] = T.target;
    std::vector<double> r(9);
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) r[static_cast<size_t>(3 * i + c)] = T.rotation(i, c);
    j["rotation"] = r;
    j["translation"] = {T.translation.x(), T.translation.y(), T.translation.z()};
    return j.dump(2) + "\n";
}

RigidTransform load_transform(const std::string& path) {
    return parse_transform(read_file(path));
}

void save_transform(const RigidTransform& T, const std::string& path) {
    write_file(path, write_transform(T));
}

} // namespace proxpose
