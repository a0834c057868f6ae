#include <doctest.h>

#include <cmath>

#include "boneloc/error.hpp"
#include "boneloc/geom/bvh.hpp"
#include "boneloc/geom/camera.hpp"
#include "boneloc/geom/kdtree.hpp"
#include "boneloc/geom/rigid_transform.hpp"
#include "boneloc/rng.hpp"

using namespace boneloc;
using namespace boneloc::geom;

namespace {

RigidTransform random_transform(Rng& rng) {
  const Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  const Eigen::Vector3d t(rng.uniform(-500, 500), rng.uniform(-500, 500), rng.uniform(-500, 500));
  return RigidTransform::from_axis_angle(axis.norm() > 1e-9 ? axis : Eigen::Vector3d::UnitX(),
                                         rng.uniform(-M_PI, M_PI), t);
}

constexpr double kDeg = M_PI / 180.0;

}  // namespace

TEST_SUITE_BEGIN("geom");

TEST_CASE("compose: identity and inverse") {
  Rng rng(11);
  const RigidTransform x = random_transform(rng);
  const RigidTransform id;

  const RigidTransform ix = compose(id, x);
  CHECK((ix.rotation() - x.rotation()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((ix.translation() - x.translation()).norm() == doctest::Approx(0.0));

  const RigidTransform xi = compose(x, invert(x));
  CHECK(rotation_angle_deg(xi) < 1e-7);
  CHECK(translation_norm_mm(xi) < 1e-9 * 500);
}

TEST_CASE("compose: rotations about a common axis add") {
  const auto rz30 = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), 30 * kDeg);
  const auto rz60 = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), 60 * kDeg);
  const auto rz90 = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), 90 * kDeg);
  const auto composed = compose(rz30, rz60);
  CHECK((composed.rotation() - rz90.rotation()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(translation_norm_mm(composed) == 0.0);
}

TEST_CASE("invert: trivial cases and double-inversion property") {
  CHECK(rotation_angle_deg(invert(RigidTransform::identity())) == 0.0);

  const auto t = RigidTransform::from_translation({1, 2, 3});
  CHECK((invert(t).translation() - Eigen::Vector3d(-1, -2, -3)).norm() == 0.0);

  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const RigidTransform x = random_transform(rng);
    const RigidTransform back = invert(invert(x));
    CHECK((back.rotation() - x.rotation()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((back.translation() - x.translation()).norm() < 1e-9);
    CHECK(back.is_orthonormal());
  }
}

TEST_CASE("rotation_angle_deg / translation_norm_mm") {
  CHECK(rotation_angle_deg(RigidTransform::identity()) == 0.0);
  CHECK(translation_norm_mm(RigidTransform::identity()) == 0.0);

  const auto rz2 = RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), 2 * kDeg);
  CHECK(rotation_angle_deg(rz2) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(translation_norm_mm(rz2) == 0.0);

  const auto t345 = RigidTransform::from_translation({1, 2, 2});
  CHECK(rotation_angle_deg(t345) == 0.0);
  CHECK(translation_norm_mm(t345) == doctest::Approx(3.0));
}

TEST_CASE("composition keeps rotations orthonormal over long chains") {
  Rng rng(23);
  RigidTransform acc;
  for (int i = 0; i < 2000; ++i) acc = compose(acc, random_transform(rng));
  CHECK(acc.is_orthonormal());
}

TEST_CASE("unproject: principal point and dropout skipping") {
  CameraIntrinsics k{230, 230, 160, 90, 320, 180};
  DepthFrame depth(320, 180, 0.0);
  depth.at(160, 90) = 500.0;

  const PointCloud cloud = unproject(depth, k);
  REQUIRE(cloud.size() == 1);
  CHECK((cloud.points[0] - Eigen::Vector3d(0, 0, 500)).norm() < 1e-12);

  const PointCloud empty = unproject(DepthFrame(320, 180, 0.0), k);
  CHECK(empty.empty());
}

TEST_CASE("project/unproject round-trip on a random frame") {
  CameraIntrinsics k{230, 230, 160, 90, 320, 180};
  Rng rng(31);
  DepthFrame depth(320, 180, 0.0);
  for (size_t i = 0; i < depth.pixel_count(); ++i)
    depth.z_mm[i] = rng.uniform() < 0.2 ? 0.0 : rng.uniform(300.0, 2000.0);

  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double z = depth.at(x, y);
      if (z <= 0.0) continue;
      const Eigen::Vector3d p = unproject_pixel(x, y, z, k);
      const Eigen::Vector2d px = project(p, k);
      CHECK(std::abs(px.x() - x) < 1e-6);
      CHECK(std::abs(px.y() - y) < 1e-6);
      CHECK(std::abs(p.z() - z) < 1e-6);
    }
  }
}

TEST_CASE("raycast: perpendicular triangle and miss") {
  TriangleMesh mesh;
  mesh.vertices = {{-1, -1, 1}, {3, -1, 1}, {-1, 3, 1}};
  mesh.add_triangle(0, 1, 2, PartTag::Femur);
  const Bvh bvh(mesh);

  const auto hit = bvh.raycast({0, 0, 0}, {0, 0, 1});
  REQUIRE(hit.has_value());
  CHECK(hit->t == doctest::Approx(1.0));
  CHECK(hit->tag == PartTag::Femur);

  CHECK(!bvh.raycast({0, 0, 0}, {0, 0, -1}).has_value());
}

TEST_CASE("raycast: nearest of two stacked triangles, brute-force agreement") {
  Rng rng(41);
  TriangleMesh mesh;
  // a couple of hundred random triangles in a box, plus two stacked ones
  for (int i = 0; i < 200; ++i) {
    const auto base = std::uint32_t(mesh.vertices.size());
    const Eigen::Vector3d c(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
    for (int j = 0; j < 3; ++j)
      mesh.vertices.push_back(c + Eigen::Vector3d(rng.uniform(-8, 8), rng.uniform(-8, 8),
                                                  rng.uniform(-8, 8)));
    mesh.add_triangle(base, base + 1, base + 2, PartTag::Background);
  }
  const auto base = std::uint32_t(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), {{-5, -5, 10}, {5, -5, 10}, {0, 5, 10}});
  mesh.vertices.insert(mesh.vertices.end(), {{-5, -5, 20}, {5, -5, 20}, {0, 5, 20}});
  mesh.add_triangle(base, base + 1, base + 2, PartTag::Femur);
  mesh.add_triangle(base + 3, base + 4, base + 5, PartTag::Occluder);

  const Bvh bvh(mesh);
  const auto near_hit = bvh.raycast({0, 0, -30}, {0, 0, 1});
  REQUIRE(near_hit.has_value());
  CHECK(near_hit->tag == PartTag::Femur);

  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d origin(rng.uniform(-80, 80), rng.uniform(-80, 80),
                                 rng.uniform(-80, 80));
    Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
    while (dir.norm() < 1e-9) dir = {rng.normal(), rng.normal(), rng.normal()};
    dir.normalize();
    const auto fast = bvh.raycast(origin, dir);
    const auto brute = raycast_brute(mesh, origin, dir);
    REQUIRE(fast.has_value() == brute.has_value());
    if (fast) {
      CHECK(fast->t == doctest::Approx(brute->t).epsilon(1e-12));
      CHECK(fast->tag == brute->tag);
    }
  }
}

TEST_CASE("kdtree: trivial queries") {
  PointCloud cloud;
  cloud.points = {{1, 2, 3}, {4, 5, 6}, {-1, 0, 2}};
  const KdTree tree = build_nn_index(cloud);

  const auto exact = tree.nearest({4, 5, 6});
  CHECK(exact.index == 1);
  CHECK(exact.distance_mm == 0.0);

  PointCloud single;
  single.points = {{7, 7, 7}};
  const KdTree one(single);
  CHECK(one.nearest({100, -5, 3}).index == 0);
}

TEST_CASE("kdtree: empty cloud is an error") {
  CHECK_THROWS_AS(build_nn_index(PointCloud{}), Error);
}

TEST_CASE("kdtree matches exhaustive search on 10k points / 1k queries") {
  Rng rng(53);
  PointCloud cloud;
  for (int i = 0; i < 10000; ++i)
    cloud.points.push_back({rng.uniform(-100, 100), rng.uniform(-100, 100),
                            rng.uniform(-100, 100)});
  const KdTree tree(cloud);
  for (int q = 0; q < 1000; ++q) {
    const Eigen::Vector3d query(rng.uniform(-120, 120), rng.uniform(-120, 120),
                                rng.uniform(-120, 120));
    const auto fast = tree.nearest(query);
    const auto brute = nearest_brute(cloud, query);
    CHECK(fast.index == brute.index);
    CHECK(fast.distance_mm == doctest::Approx(brute.distance_mm).epsilon(1e-14));
  }
}

TEST_SUITE_END();
