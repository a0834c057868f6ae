#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "boneloc/error.hpp"
#include "boneloc/reg/icp.hpp"
#include "boneloc/reg/kabsch.hpp"
#include "boneloc/reg/reference_model.hpp"
#include "boneloc/reg/sphere_fit.hpp"
#include "boneloc/rng.hpp"
#include "boneloc/synthcam/anatomy.hpp"

using namespace boneloc;
using namespace boneloc::reg;

namespace {

constexpr double kDeg = M_PI / 180.0;

geom::RigidTransform random_pose(Rng& rng, double max_angle_rad, double max_trans_mm) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  if (axis.norm() < 1e-9) axis = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
  if (dir.norm() < 1e-9) dir = Eigen::Vector3d::UnitX();
  return geom::RigidTransform::from_axis_angle(axis, rng.uniform(-max_angle_rad, max_angle_rad),
                                               dir.normalized() * rng.uniform(0, max_trans_mm));
}

// shared digitised-surface fixture (coarse sampling keeps unit tests fast)
const ReferenceModel& reference_fixture() {
  static const ReferenceModel model = [] {
    Rng rng(404);
    auto cloud = synthcam::sample_surface(synthcam::make_femur_mesh(), 1.0,
                                          geom::PartTag::Femur,
                                          synthcam::femur_digitize_y_max(), rng);
    return ReferenceModel(std::move(cloud), synthcam::femur_hip_center());
  }();
  return model;
}

// contiguous camera-facing patch: ball around a distal seed, filtered to the
// seed's radial side (a camera never sees the back of the bone)
geom::PointCloud surface_patch(const ReferenceModel& model, double fraction, Rng& rng,
                               size_t cap = SIZE_MAX) {
  const auto& pts = model.surface.points;
  Eigen::Vector3d seed = pts[rng.uniform_index(pts.size())];
  for (int g = 0; g < 200 && seed.y() > 45.0; ++g) seed = pts[rng.uniform_index(pts.size())];
  std::vector<std::pair<double, size_t>> by_dist(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) by_dist[i] = {(pts[i] - seed).squaredNorm(), i};
  const size_t keep = size_t(fraction * double(pts.size()));
  std::nth_element(by_dist.begin(), by_dist.begin() + keep, by_dist.end());
  const Eigen::Vector3d radial =
      (seed - synthcam::femur_centerline(seed.y())).normalized();
  geom::PointCloud patch;
  for (size_t i = 0; i < keep && patch.size() < cap; ++i) {
    const Eigen::Vector3d& p = pts[by_dist[i].second];
    if ((p - synthcam::femur_centerline(p.y())).normalized().dot(radial) <= 0.1) continue;
    patch.points.push_back(p);
  }
  return patch;
}

}  // namespace

TEST_SUITE_BEGIN("reg");

TEST_CASE("kabsch: identity, exact recovery, weight-scale invariance") {
  Rng rng(1);
  std::vector<Eigen::Vector3d> src;
  for (int i = 0; i < 40; ++i)
    src.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)});

  const auto id = kabsch(src, src);
  CHECK(geom::rotation_angle_deg(id) < 1e-9);
  CHECK(geom::translation_norm_mm(id) < 1e-9);

  const geom::RigidTransform truth = random_pose(rng, M_PI, 300.0);
  std::vector<Eigen::Vector3d> dst;
  for (const auto& p : src) dst.push_back(truth.apply(p));
  const auto fit = kabsch(src, dst);
  CHECK((fit.rotation() - truth.rotation()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((fit.translation() - truth.translation()).norm() < 1e-9);
  // residual after the returned transform is zero for exact correspondences
  for (size_t i = 0; i < src.size(); ++i) CHECK((fit.apply(src[i]) - dst[i]).norm() < 1e-9);

  std::vector<double> w1(src.size(), 1.0), w2(src.size(), 2.0);
  const auto f1 = kabsch(src, dst, w1);
  const auto f2 = kabsch(src, dst, w2);
  CHECK((f1.matrix() - f2.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kabsch: degenerate rank errors") {
  std::vector<Eigen::Vector3d> line = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  CHECK_THROWS_AS(kabsch(line, line), Error);
  std::vector<Eigen::Vector3d> two = {{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(kabsch(two, two), Error);
}

TEST_CASE("icp: self-registration is identity, too-few-points errors") {
  const ReferenceModel& model = reference_fixture();
  IcpParams params;

  geom::PointCloud self;
  Rng rng(2);
  for (int i = 0; i < 2000; ++i)
    self.points.push_back(model.surface.points[rng.uniform_index(model.surface.size())]);
  const IcpResult res = icp(self, model, geom::RigidTransform::identity(), params);
  CHECK(geom::rotation_angle_deg(res.pose) < 1e-6);
  CHECK(geom::translation_norm_mm(res.pose) < 1e-6);
  CHECK(res.stats.rms_mm < 1e-9);

  geom::PointCloud few;
  few.points.assign(10, {0, 0, 0});
  CHECK_THROWS_AS(icp(few, model, geom::RigidTransform::identity(), params), Error);
}

TEST_CASE("icp: recovers a 5 deg / 10 mm perturbation on the full surface") {
  const ReferenceModel& model = reference_fixture();
  Rng rng(3);
  const auto truth = random_pose(rng, 5.0 * kDeg, 10.0);
  geom::PointCloud source;
  for (int i = 0; i < 3000; ++i)
    source.points.push_back(truth.apply(model.surface.points[rng.uniform_index(model.surface.size())]));

  IcpParams params;
  params.max_iterations = 80;
  const IcpResult res = icp(source, model, geom::RigidTransform::identity(), params);
  const auto err = geom::compose(geom::invert(truth), res.pose);
  CHECK(geom::rotation_angle_deg(err) < 0.1);
  CHECK(geom::translation_norm_mm(err) < 0.1);
  CHECK(res.stats.converged);
}

TEST_CASE("icp: rms is non-increasing across iterations with rejection off") {
  const ReferenceModel& model = reference_fixture();
  Rng rng(4);
  const auto truth = random_pose(rng, 8.0 * kDeg, 15.0);
  geom::PointCloud source;
  for (int i = 0; i < 1500; ++i) {
    const auto& p = model.surface.points[rng.uniform_index(model.surface.size())];
    source.points.push_back(truth.apply(p) +
                            Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 0.3);
  }
  IcpParams params;
  params.rejection_scale = 0.0;  // fixed correspondence set per iteration
  params.convergence_rot_rad = 0.0;
  params.convergence_trans_mm = 0.0;
  params.max_iterations = 1;

  geom::RigidTransform pose;  // identity start, replay iteration by iteration
  double prev_rms = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 25; ++iter) {
    const IcpResult step = icp(source, model, pose, params);
    CHECK(step.stats.rms_mm <= prev_rms + 1e-9);
    prev_rms = step.stats.rms_mm;
    pose = step.pose;
  }
}

TEST_CASE("bicp: zero hip weight equals plain icp") {
  const ReferenceModel& model = reference_fixture();
  Rng rng(5);
  const auto truth = random_pose(rng, 4.0 * kDeg, 8.0);
  geom::PointCloud source;
  for (int i = 0; i < 1200; ++i)
    source.points.push_back(truth.apply(model.surface.points[rng.uniform_index(model.surface.size())]));

  IcpParams params;
  HipConstraint hip;
  hip.hip_model = model.hip_center;
  hip.hip_camera = truth.apply(model.hip_center);
  hip.weight = 0.0;

  const IcpResult plain = icp(source, model, geom::RigidTransform::identity(), params);
  const IcpResult bounded = bicp(source, model, hip, geom::RigidTransform::identity(), params);
  CHECK((plain.pose.matrix() - bounded.pose.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("bicp: exact patch + exact hip recovers the exact pose") {
  const ReferenceModel& model = reference_fixture();
  Rng rng(6);
  const auto truth = random_pose(rng, 2.0 * kDeg, 5.0);
  geom::PointCloud patch = surface_patch(model, 0.12, rng);
  for (auto& p : patch.points) p = truth.apply(p);

  HipConstraint hip;
  hip.hip_model = model.hip_center;
  hip.hip_camera = truth.apply(model.hip_center);

  IcpParams params;
  params.max_iterations = 100;
  params.convergence_rot_rad = 1e-9;  // exact data has no noise floor
  params.convergence_trans_mm = 1e-8;
  const IcpResult res = bicp(patch, model, hip, geom::RigidTransform::identity(), params);
  const auto err = geom::compose(geom::invert(truth), res.pose);
  CHECK(geom::rotation_angle_deg(err) < 1e-4);
  CHECK(geom::translation_norm_mm(err) < 1e-3);
}

TEST_CASE("bicp: bounded hip residual and rotational advantage on small patches") {
  const ReferenceModel& model = reference_fixture();
  int bicp_wins = 0, trials = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    Rng rng(seed);
    const auto truth = random_pose(rng, 180.0 * kDeg, 300.0);
    geom::PointCloud patch = surface_patch(model, 0.08 + rng.uniform(0.0, 0.07), rng, 2000);
    for (auto& p : patch.points)
      p = truth.apply(p) + Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 0.3;

    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
    const auto init = geom::compose(
        truth, geom::RigidTransform::from_axis_angle(axis, 5.0 * kDeg, dir.normalized() * 10.0));
    HipConstraint hip;
    hip.hip_model = model.hip_center;
    hip.hip_camera = truth.apply(model.hip_center);

    IcpParams params;
    const IcpResult plain = icp(patch, model, init, params);
    const IcpResult bounded = bicp(patch, model, hip, init, params);

    // the "bounded" property: hip residual never worse than plain ICP's
    const double plain_hip = (plain.pose.apply(model.hip_center) - hip.hip_camera).norm();
    CHECK(bounded.stats.hip_residual_mm <= plain_hip + 1e-6);

    const double rot_plain =
        geom::rotation_angle_deg(geom::compose(geom::invert(truth), plain.pose));
    const double rot_bicp =
        geom::rotation_angle_deg(geom::compose(geom::invert(truth), bounded.pose));
    bicp_wins += rot_bicp <= rot_plain ? 1 : 0;
    ++trials;
  }
  CHECK(double(bicp_wins) >= 0.8 * double(trials));
}

TEST_CASE("bicp: pinned mode maps the hip exactly (warm-started)") {
  const ReferenceModel& model = reference_fixture();
  Rng rng(7);
  const auto truth = random_pose(rng, 6.0 * kDeg, 10.0);
  geom::PointCloud patch = surface_patch(model, 0.12, rng);
  for (auto& p : patch.points) p = truth.apply(p);

  HipConstraint hip;
  hip.hip_model = model.hip_center;
  hip.hip_camera = truth.apply(model.hip_center);
  IcpParams params;
  params.max_iterations = 100;
  const auto init = geom::compose(truth, random_pose(rng, 1.5 * kDeg, 3.0));
  const IcpResult res = bicp(patch, model, hip, init, params, BicpMode::Pinned);
  CHECK(res.stats.hip_residual_mm < 1e-9);
  CHECK(geom::rotation_angle_deg(geom::compose(geom::invert(truth), res.pose)) < 0.5);
  CHECK(geom::translation_norm_mm(geom::compose(geom::invert(truth), res.pose)) < 0.5);
}

TEST_CASE("fit_sphere: tetrahedron, exact cloud, degenerate errors") {
  // regular tetrahedron on the unit sphere
  const double s = 1.0 / std::sqrt(3.0);
  std::vector<Eigen::Vector3d> tetra = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  const SphereFit t = fit_sphere(tetra);
  CHECK(t.center.norm() < 1e-12);
  CHECK(t.radius_mm == doctest::Approx(1.0));

  Rng rng(8);
  const Eigen::Vector3d center(10, 20, 30);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
    pts.push_back(center + 400.0 * dir.normalized());
  }
  const SphereFit fit = fit_sphere(pts);
  CHECK((fit.center - center).norm() < 1e-6);
  CHECK(fit.radius_mm == doctest::Approx(400.0).epsilon(1e-9));
  CHECK(fit.rms_mm < 1e-9);

  std::vector<Eigen::Vector3d> planar;
  for (int i = 0; i < 30; ++i) planar.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0});
  CHECK_THROWS_AS(fit_sphere(planar), Error);
  CHECK_THROWS_AS(fit_sphere(std::vector<Eigen::Vector3d>{{0, 0, 0}, {1, 1, 1}, {2, 0, 1}}),
                  Error);
}

TEST_CASE("fit_sphere: 120-degree cap with tracker noise (paper pivot protocol)") {
  Rng rng(9);
  std::vector<double> errors;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector3d center(rng.uniform(-50, 50), rng.uniform(-50, 50),
                                 rng.uniform(-50, 50));
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 40; ++i) {
      const double phi = std::acos(1.0 - rng.uniform() * (1.0 - std::cos(60.0 * kDeg)));
      const double th = rng.uniform(0.0, 2.0 * M_PI);
      Eigen::Vector3d p(std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th),
                        std::cos(phi));
      pts.push_back(center + 400.0 * p +
                    Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 0.5);
    }
    errors.push_back((fit_sphere(pts).center - center).norm());
  }
  std::nth_element(errors.begin(), errors.begin() + 50, errors.end());
  CHECK(errors[50] < 2.0);
}

TEST_CASE("pivot_landmarks: identities, translation, synthetic pivot recovery") {
  using Pair = std::pair<geom::RigidTransform, geom::RigidTransform>;
  const geom::RigidTransform id;

  std::vector<Pair> all_id(3, {id, id});
  const auto origins = pivot_landmarks(all_id, id);
  for (const auto& o : origins) CHECK(o.norm() == 0.0);

  std::vector<Pair> trans = {{id, geom::RigidTransform::from_translation({1, 2, 3})}};
  CHECK((pivot_landmarks(trans, id)[0] - Eigen::Vector3d(1, 2, 3)).norm() < 1e-12);

  // leg rotating about a known pivot: landmarks sphere-fit back to the pivot
  Rng rng(10);
  const Eigen::Vector3d pivot(120, -40, 800);
  const geom::RigidTransform hand_eye = random_pose(rng, 30 * kDeg, 50);
  const Eigen::Vector3d lever(0, 300, 0);
  std::vector<Pair> frames;
  for (int i = 0; i < 50; ++i) {
    // femur origin moves on a sphere of radius |lever| around the pivot
    const auto rot = random_pose(rng, 40 * kDeg, 0);
    const Eigen::Vector3d origin_world = pivot + rot.rotate(lever);
    // choose tracker pose so that T_A<-Md * T_Md<-D * P_icp * 0 = origin_world
    const geom::RigidTransform p_icp = random_pose(rng, 20 * kDeg, 30);
    const geom::RigidTransform chain_tail = geom::compose(hand_eye, p_icp);
    const Eigen::Vector3d tail_origin = chain_tail.apply(Eigen::Vector3d::Zero());
    const geom::RigidTransform tracker =
        geom::RigidTransform::from_translation(origin_world - tail_origin);
    frames.push_back({tracker, p_icp});
  }
  const auto landmarks = pivot_landmarks(frames, hand_eye);
  const SphereFit fit = fit_sphere(landmarks);
  CHECK((fit.center - pivot).norm() < 1e-6);
  CHECK(fit.radius_mm == doctest::Approx(300.0).epsilon(1e-9));
}

TEST_CASE("reference model file round-trip") {
  Rng rng(11);
  geom::PointCloud cloud;
  for (int i = 0; i < 500; ++i)
    cloud.points.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)});
  const ReferenceModel model(std::move(cloud), {1.5, -2.5, 3.5});

  const auto dir = std::filesystem::temp_directory_path() / "boneloc_ref_io";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "ref.bin").string();
  save_reference(path, model);
  const ReferenceModel loaded = load_reference(path);
  REQUIRE(loaded.surface.size() == model.surface.size());
  for (size_t i = 0; i < model.surface.size(); ++i)
    CHECK(loaded.surface.points[i] == model.surface.points[i]);
  CHECK(loaded.hip_center == model.hip_center);
  CHECK(loaded.index.nearest(model.surface.points[7]).index == 7);
}

TEST_SUITE_END();
