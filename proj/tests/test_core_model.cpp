#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/LU>

#include "semcal/geometry.hpp"
#include "semcal/rng.hpp"
#include "semcal/semantics.hpp"

using namespace semcal;

namespace {

PoseParams random_pose(Rng& rng) {
  PoseParams p;
  p.tx = rng.uniform(-100.0, 100.0);
  p.ty = rng.uniform(-100.0, 100.0);
  p.tz = rng.uniform(-100.0, 100.0);
  p.yaw_deg = rng.uniform(-179.9, 180.0);
  p.pitch_deg = rng.uniform(-89.0, 89.0);
  return p;
}

}  // namespace

TEST_CASE("class table") {
  CHECK(kClassCount == 14);
  CHECK(class_from_id(0) == ClassId::invalid);
  CHECK(class_from_id(9) == ClassId::sky);
  CHECK(class_from_id(13) == ClassId::other_dynamic);
  CHECK(!class_from_id(14));
  CHECK(!class_from_id(-1));
  CHECK(class_from_name("traffic_sign") == ClassId::traffic_sign);
  CHECK(!class_from_name("tree"));

  for (int id = 0; id < kClassCount; ++id) {
    const auto cls = static_cast<ClassId>(id);
    CHECK(is_dynamic(cls) == (id >= 10));
    CHECK(class_name(cls) == class_name(cls));  // total over the table
  }
  // Invalid and sky never contribute; dynamic classes never contribute.
  CHECK(is_loss_excluded(ClassId::invalid));
  CHECK(is_loss_excluded(ClassId::sky));
  CHECK(is_loss_excluded(ClassId::car));
  CHECK(!is_loss_excluded(ClassId::road));
  // Sky may be declared valid; invalid and dynamic stay excluded.
  CHECK(!is_loss_excluded(ClassId::sky, true));
  CHECK(is_loss_excluded(ClassId::invalid, true));
  CHECK(is_loss_excluded(ClassId::pedestrian, true));
}

TEST_CASE("default palette is injective over valid classes") {
  const Palette& p = default_palette();
  CHECK(p.injective_over_valid());
  for (int id = 0; id < kClassCount; ++id) {
    const auto& c = p.colors[static_cast<std::size_t>(id)];
    CHECK(c.minCoeff() >= 0.0);
    CHECK(c.maxCoeff() <= 1.0);
  }
  CHECK(p.color(ClassId::invalid) == Eigen::Vector3d::Zero());
}

TEST_CASE("pose_to_extrinsic at identity is the axis permutation") {
  const ExtrinsicMatrix e = pose_to_extrinsic(PoseParams{});
  Eigen::Matrix3d expected;
  expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((e.R - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(e.t == Eigen::Vector3d::Zero());
}

TEST_CASE("pose_to_extrinsic at yaw 90 matches the hand-computed permutation") {
  PoseParams p;
  p.yaw_deg = 90.0;
  const ExtrinsicMatrix e = pose_to_extrinsic(p);
  // R = [[0,1,0],[0,0,-1],[-1,0,0]]: world +x (east) lands behind the
  // camera (-z) because positive yaw turns the view from north to west.
  Eigen::Matrix3d expected;
  expected << 0, 1, 0, 0, 0, -1, -1, 0, 0;
  CHECK((e.R - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((e.R * Eigen::Vector3d(1, 0, 0) - Eigen::Vector3d(0, 0, -1)).norm() < 1e-15);
}

TEST_CASE("pose round-trips through the extrinsic matrix") {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    const PoseParams p = random_pose(rng);
    const PoseParams q = pose_from_extrinsic(pose_to_extrinsic(p));
    CHECK(std::abs(q.tx - p.tx) < 1e-9);
    CHECK(std::abs(q.ty - p.ty) < 1e-9);
    CHECK(std::abs(q.tz - p.tz) < 1e-9);
    CHECK(std::abs(angle_diff_deg(q.yaw_deg, p.yaw_deg)) < 1e-9);
    CHECK(std::abs(angle_diff_deg(q.pitch_deg, p.pitch_deg)) < 1e-9);
  }
}

TEST_CASE("rotations stay orthonormal over a million random poses") {
  Rng rng(11);
  double worst_gram = 0.0;
  double worst_det = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const ExtrinsicMatrix e = pose_to_extrinsic(random_pose(rng));
    const Eigen::Matrix3d gram = e.R.transpose() * e.R;
    worst_gram = std::max(worst_gram,
                          (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    worst_det = std::max(worst_det, std::abs(e.R.determinant() - 1.0));
  }
  CHECK(worst_gram < 1e-9);
  CHECK(worst_det < 1e-9);
}

TEST_CASE("project hits the principal point for a point on the optical axis") {
  CameraIntrinsics k{500.0, 500.0, 320.0, 240.0, 640, 480};
  // At the identity pose the camera looks along world +y.
  const auto proj = project(k, pose_to_extrinsic(PoseParams{}), Point3(0, 1, 0));
  REQUIRE(proj);
  CHECK(proj->u == doctest::Approx(320.0).epsilon(1e-12));
  CHECK(proj->v == doctest::Approx(240.0).epsilon(1e-12));
  CHECK(proj->depth == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("project evaluates the pinhole formula") {
  CameraIntrinsics k{100.0, 100.0, 50.0, 50.0, 100, 100};
  const ExtrinsicMatrix identity{};  // camera frame input
  const auto proj = project(k, identity, Point3(0.5, 0, 1));
  REQUIRE(proj);
  CHECK(proj->u == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(proj->v == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(proj->depth == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("project reports points behind the camera") {
  CameraIntrinsics k{100.0, 100.0, 50.0, 50.0, 100, 100};
  const ExtrinsicMatrix identity{};
  CHECK(!project(k, identity, Point3(0, 0, -1)));
  CHECK(!project(k, identity, Point3(0, 0, 0.05)));  // inside the near clip
  CHECK(project(k, identity, Point3(0, 0, 0.11)));
}

TEST_CASE("projection is scale-consistent in camera coordinates") {
  CameraIntrinsics k{320.0, 280.0, 160.0, 120.0, 320, 240};
  const ExtrinsicMatrix identity{};
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Point3 x(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.5, 50));
    const double s = rng.uniform(0.2, 10.0);
    const auto a = project(k, identity, x);
    const auto b = project(k, identity, Point3(s * x));
    REQUIRE(a);
    REQUIRE(b);
    CHECK(std::abs(a->u - b->u) < 1e-9);
    CHECK(std::abs(a->v - b->v) < 1e-9);
  }
}

TEST_CASE("translating pose and point together leaves the projection unchanged") {
  CameraIntrinsics k{240.0, 240.0, 120.0, 90.0, 240, 180};
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    PoseParams p = random_pose(rng);
    p.pitch_deg = rng.uniform(-30, 30);
    const Point3 x(p.tx + rng.uniform(-10, 10), p.ty + rng.uniform(-10, 10),
                   p.tz + rng.uniform(-10, 10));
    const Point3 d(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
    PoseParams shifted = p;
    shifted.tx += d.x();
    shifted.ty += d.y();
    shifted.tz += d.z();
    const auto a = project(k, pose_to_extrinsic(p), x);
    const auto b = project(k, pose_to_extrinsic(shifted), Point3(x + d));
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      const double tol = 1e-9 * std::max({1.0, std::abs(a->u), std::abs(a->v)});
      CHECK(std::abs(a->u - b->u) < tol);
      CHECK(std::abs(a->v - b->v) < tol);
      CHECK(std::abs(a->depth - b->depth) < 1e-9);
    }
  }
}

TEST_CASE("validation rejects malformed inputs") {
  CHECK_THROWS_AS((CameraIntrinsics{0, 1, 1, 1, 2, 2}.validate()), Error);
  CHECK_THROWS_AS((CameraIntrinsics{100, 100, -1, 50, 100, 100}.validate()), Error);

  PoseParams p;
  p.yaw_deg = -180.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.yaw_deg = 180.0;
  CHECK_NOTHROW(p.validate());
  p.pitch_deg = 90.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.pitch_deg = std::nan("");
  CHECK_THROWS_AS(p.validate(), Error);

  ExtrinsicMatrix e = pose_to_extrinsic(PoseParams{1, 2, 3, 40, -20});
  CHECK_NOTHROW(e.validate());
  e.R(0, 0) += 1e-6;
  CHECK_THROWS_AS(e.validate(), Error);
}
