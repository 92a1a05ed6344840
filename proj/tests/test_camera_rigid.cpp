#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "proxpose/camera.hpp"
#include "proxpose/rigid.hpp"
#include "proxpose/rng.hpp"

using namespace proxpose;

namespace {

CameraIntrinsics test_intrinsics() { return {600.0, 600.0, 320.0, 240.0}; }

Eigen::Matrix3d random_rotation(Rng& rng) {
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    while (q.norm() < 1e-6) q = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    return q.normalized().toRotationMatrix();
}

// Angle of the relative rotation via atan2(sin, cos); the skew part keeps
// the metric linear near zero where acos(trace) loses half the digits.
double rotation_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
    const Eigen::Matrix3d m = a.transpose() * b;
    const Eigen::Vector3d skew(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    const double s = 0.5 * skew.norm();
    const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::atan2(s, c);
}

} // namespace

TEST_SUITE("camera") {

TEST_CASE("principal point back-projects onto the optical axis") {
    auto p = backproject(320.0, 240.0, 1.0, test_intrinsics());
    CHECK(p.x == 0.0);
    CHECK(p.y == 0.0);
    CHECK(p.z == 1.0);
    CHECK(p.frame == "camera");
}

TEST_CASE("back-projection evaluates the pinhole equations") {
    // x = 1.2 * (920 - 320) / 600 = 1.2
    auto p = backproject(920.0, 240.0, 1.2, test_intrinsics());
    CHECK(p.x == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(p.y == 0.0);
    CHECK(p.z == 1.2);
}

TEST_CASE("non-positive depth is rejected") {
    CHECK_THROWS_AS(backproject(10, 10, 0.0, test_intrinsics()), ConfigError);
    CHECK_THROWS_AS(backproject(10, 10, -1.0, test_intrinsics()), ConfigError);
}

TEST_CASE("project and back-project round trip within 1e-9 px") {
    Rng rng(21);
    const auto intr = test_intrinsics();
    for (int i = 0; i < 200; ++i) {
        const double u = rng.uniform(0, 640), v = rng.uniform(0, 480);
        const double k = rng.uniform(0.2, 5.0);
        double u2, v2;
        project(backproject(u, v, k, intr), intr, u2, v2);
        CHECK(std::abs(u2 - u) < 1e-9);
        CHECK(std::abs(v2 - v) < 1e-9);
    }
}

TEST_CASE("pixel radius: 20 mm at 1 m with f=600 is exactly 12 px") {
    CHECK(pixel_radius(0.020, 1.0, test_intrinsics(), Axis::x) == 12.0);
}

TEST_CASE("pixel radius halves when depth doubles") {
    const auto intr = test_intrinsics();
    const double r1 = pixel_radius(0.020, 1.0, intr, Axis::x);
    const double r2 = pixel_radius(0.020, 2.0, intr, Axis::x);
    CHECK(r1 == 2.0 * r2);
}

TEST_CASE("equal focal lengths give equal radii on both axes") {
    const auto intr = test_intrinsics();
    CHECK(pixel_radius(0.003, 0.7, intr, Axis::x) == pixel_radius(0.003, 0.7, intr, Axis::y));
}

TEST_CASE("pixel radius inverts back to the metric radius") {
    Rng rng(3);
    const auto intr = test_intrinsics();
    for (int i = 0; i < 200; ++i) {
        const double r = rng.uniform(0.001, 0.1);
        const double k = rng.uniform(0.1, 8.0);
        const double px = pixel_radius(r, k, intr, Axis::x);
        CHECK(px * k / intr.fx == doctest::Approx(r).epsilon(1e-14));
    }
    CHECK_THROWS_AS(pixel_radius(0.02, 0.0, intr, Axis::x), ConfigError);
    CHECK_THROWS_AS(pixel_radius(0.0, 1.0, intr, Axis::x), ConfigError);
}

} // TEST_SUITE

TEST_SUITE("rigid") {

TEST_CASE("identity and pure translation") {
    RigidTransform id;
    id.source = id.target = "camera";
    Point3 p{0.1, 0.2, 0.3, "camera"};
    CHECK(apply_rigid(p, id) == p);

    RigidTransform t;
    t.translation = Eigen::Vector3d(0, 0, 1);
    Point3 origin{0, 0, 0, "camera"};
    auto q = apply_rigid(origin, t);
    CHECK(q.x == 0.0);
    CHECK(q.y == 0.0);
    CHECK(q.z == 1.0);
}

TEST_CASE("frame mismatch is refused") {
    RigidTransform T;
    T.source = "camera";
    T.target = "base";
    Point3 p{0, 0, 0, "mocap"};
    CHECK_THROWS_AS(apply_rigid(p, T), FrameError);
}

TEST_CASE("transform composed with its inverse is the identity") {
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        RigidTransform T;
        T.rotation = random_rotation(rng);
        T.translation = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
        T.source = "camera";
        T.target = "mocap";
        Point3 p{rng.normal(), rng.normal(), rng.normal(), "camera"};
        Point3 back = apply_rigid(apply_rigid(p, T), T.inverse());
        CHECK(std::abs(back.x - p.x) < 1e-12);
        CHECK(std::abs(back.y - p.y) < 1e-12);
        CHECK(std::abs(back.z - p.z) < 1e-12);
        CHECK(back.frame == "camera");
    }
}

TEST_CASE("estimation: identical clouds give the identity") {
    CorrespondenceSet corr;
    corr.pairs = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {0, 1, 0}},
                  {{0, 0, 1}, {0, 0, 1}}};
    auto T = estimate_rigid(corr);
    CHECK((T.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(T.translation.norm() < 1e-12);
}

TEST_CASE("estimation: pure translation is recovered exactly") {
    const Eigen::Vector3d shift(1, 2, 3);
    CorrespondenceSet corr;
    for (const auto& p : {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0),
                          Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0.3, 0.4, 0.5)})
        corr.pairs.emplace_back(p, p + shift);
    auto T = estimate_rigid(corr);
    CHECK((T.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((T.translation - shift).norm() < 1e-12);
}

TEST_CASE("estimation recovers random rigid motions on 8 points") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Matrix3d R = random_rotation(rng);
        const Eigen::Vector3d t(rng.normal(), rng.normal(), rng.normal());
        CorrespondenceSet corr;
        for (int i = 0; i < 8; ++i) {
            const Eigen::Vector3d p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
            corr.pairs.emplace_back(p, R * p + t);
        }
        auto T = estimate_rigid(corr);
        for (const auto& [p, q] : corr.pairs)
            CHECK((T.rotation * p + T.translation - q).norm() < 1e-10);
        CHECK(rotation_angle(T.rotation, R) < 1e-9);
        CHECK((T.translation - t).norm() < 1e-9);
    }
}

TEST_CASE("estimation always yields a proper rotation, even from noisy reflections") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        CorrespondenceSet corr;
        // Nearly planar clouds with heavy noise push the solver toward the
        // reflection branch without the correction.
        for (int i = 0; i < 6; ++i) {
            Eigen::Vector3d p(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.01 * rng.normal());
            Eigen::Vector3d q(-p.x() + 0.3 * rng.normal(), p.y() + 0.3 * rng.normal(),
                              0.01 * rng.normal());
            corr.pairs.emplace_back(p, q);
        }
        auto T = estimate_rigid(corr);
        CHECK(T.rotation.determinant() > 0.0);
        CHECK((T.rotation.transpose() * T.rotation - Eigen::Matrix3d::Identity())
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
    }
}

TEST_CASE("too few or degenerate correspondences are rejected") {
    CorrespondenceSet two;
    two.pairs = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}};
    CHECK_THROWS_AS(estimate_rigid(two), EmptyResultError);

    CorrespondenceSet line;
    for (int i = 0; i < 5; ++i)
        line.pairs.emplace_back(Eigen::Vector3d(i, 0, 0), Eigen::Vector3d(i, 0, 0));
    CHECK_THROWS_AS(estimate_rigid(line), ConfigError);
}

TEST_CASE("uniform target shift moves only the translation") {
    Rng rng(41);
    CorrespondenceSet corr;
    const Eigen::Matrix3d R = random_rotation(rng);
    const Eigen::Vector3d t(0.2, -0.1, 0.4);
    for (int i = 0; i < 8; ++i) {
        const Eigen::Vector3d p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        corr.pairs.emplace_back(p, R * p + t);
    }
    const Eigen::Vector3d eps(0.013, -0.007, 0.021);
    CorrespondenceSet shifted = corr;
    for (auto& [p, q] : shifted.pairs) q += eps;

    auto T0 = estimate_rigid(corr);
    auto T1 = estimate_rigid(shifted);
    CHECK(rotation_angle(T0.rotation, T1.rotation) < 1e-12);
    CHECK((T1.translation - T0.translation - eps).norm() < 1e-12);
}

TEST_CASE("fix_translation replaces only the translation") {
    Rng rng(2);
    RigidTransform T;
    T.rotation = random_rotation(rng);
    T.translation = Eigen::Vector3d(1, 2, 3);
    T.source = "camera";
    T.target = "mocap";

    auto same = fix_translation(T, Point3{1, 2, 3, "mocap"});
    CHECK((same.translation - T.translation).norm() == 0.0);
    CHECK(same.rotation == T.rotation);

    auto zeroed = fix_translation(T, Point3{0, 0, 0, "mocap"});
    CHECK(zeroed.translation.norm() == 0.0);
    CHECK(zeroed.rotation == T.rotation);

    CHECK_THROWS_AS(fix_translation(T, Point3{0, 0, 0, "camera"}), FrameError);
}

TEST_CASE("anchored transform residual equals direct evaluation") {
    Rng rng(6);
    CorrespondenceSet corr;
    const Eigen::Matrix3d R = random_rotation(rng);
    const Eigen::Vector3d t(0.5, 0.6, 0.7);
    for (int i = 0; i < 8; ++i) {
        const Eigen::Vector3d p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        corr.pairs.emplace_back(p, R * p + t + 0.001 * Eigen::Vector3d(rng.normal(),
                                                                       rng.normal(),
                                                                       rng.normal()));
    }
    auto T = estimate_rigid(corr);
    auto anchored = fix_translation(T, Point3{0.51, 0.62, 0.69, "mocap"});

    double sum = 0.0;
    for (const auto& [p, q] : corr.pairs)
        sum += (anchored.rotation * p + anchored.translation - q).squaredNorm();
    const double direct = std::sqrt(sum / double(corr.pairs.size()));
    CHECK(residual_rms(corr, anchored) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("residual rms basics") {
    CorrespondenceSet corr;
    corr.pairs = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {0, 1, 0}}};
    RigidTransform id;
    CHECK(residual_rms(corr, id) == 0.0);

    CorrespondenceSet one;
    one.pairs = {{{0, 0, 0}, {0.03, 0, 0}}};
    CHECK(residual_rms(one, id) == doctest::Approx(0.03).epsilon(1e-12));

    CorrespondenceSet empty;
    CHECK_THROWS_AS(residual_rms(empty, id), EmptyResultError);
}

TEST_CASE("estimated transform beats random alternatives") {
    Rng rng(71);
    CorrespondenceSet corr;
    for (int i = 0; i < 10; ++i) {
        const Eigen::Vector3d p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        const Eigen::Vector3d q = p + 0.05 * Eigen::Vector3d(rng.normal(), rng.normal(),
                                                             rng.normal());
        corr.pairs.emplace_back(p, q);
    }
    auto best = estimate_rigid(corr);
    const double best_rms = residual_rms(corr, best);
    for (int alt = 0; alt < 50; ++alt) {
        RigidTransform T;
        T.rotation = random_rotation(rng);
        T.translation = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
        T.source = best.source;
        T.target = best.target;
        CHECK(best_rms <= residual_rms(corr, T) + 1e-9);
    }
}

TEST_CASE("correspondence file parsing") {
    const char* text =
        "# calibration markers\n"
        "0 0 0  1 2 3\n"
        "1 0 0  2 2 3\n"
        "\n"
        "0 1 0  1 3 3 # trailing comment\n";
    auto corr = parse_correspondences(text);
    REQUIRE(corr.pairs.size() == 3);
    CHECK(corr.pairs[0].second == Eigen::Vector3d(1, 2, 3));
    CHECK_THROWS_AS(parse_correspondences("1 2 3 4 5\n"), ParseError);
    CHECK_THROWS_AS(parse_correspondences("1 2 3 4 5 6 7\n"), ParseError);
}

TEST_CASE("transform file round trip, matrix and quaternion forms") {
    Rng rng(19);
    RigidTransform T;
    T.rotation = random_rotation(rng);
    T.translation = Eigen::Vector3d(0.1, 0.2, 0.3);
    T.source = "camera";
    T.target = "base";
    auto back = parse_transform(write_transform(T));
    CHECK((back.rotation - T.rotation).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((back.translation - T.translation).norm() == 0.0);
    CHECK(back.source == "camera");
    CHECK(back.target == "base");

    Eigen::Quaterniond q(T.rotation);
    nlohmann::json j;
    j["source"] = "camera";
    j["target"] = "base";
    j["quaternion"] = {q.w(), q.x(), q.y(), q.z()};
    j["translation"] = {0.1, 0.2, 0.3};
    auto from_quat = parse_transform(j.dump());
    CHECK((from_quat.rotation - T.rotation).cwiseAbs().maxCoeff() < 1e-9);

    CHECK_THROWS_AS(parse_transform("{\"translation\": [0,0,0]}"), ParseError);
}

} // TEST_SUITE
