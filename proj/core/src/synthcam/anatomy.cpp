#include "boneloc/synthcam/anatomy.hpp"

#include <cmath>
#include <functional>

namespace boneloc::synthcam {

using geom::PartTag;
using geom::TriangleMesh;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFemurLength = 404.0;  // distal cap at y=-12 .. head at ~+400

// Gentle bow of the shaft; breaks the rotational near-symmetry of the tube
// so small registration patches stay well-conditioned.
Eigen::Vector3d centerline(double y) {
  return {3.5 * std::sin(kPi * y / 412.0), y, 2.2 * std::sin(2.0 * kPi * y / 412.0 + 0.8)};
}

double femur_base_radius(double y) {
  return 17.0 + 18.0 * std::exp(-std::pow((y - 10.0) / 22.0, 2)) +
         1.6 * std::sin(y / 41.0 + 1.2) + 6.0 * std::exp(-std::pow((y - 372.0) / 26.0, 2));
}

double femur_bump(double y, double theta) {
  // two unequal condyles, a patellar groove and an intercondylar notch that
  // deepens toward the distal tip; the sculpting keeps small-patch
  // registration well-posed about the shaft axis
  const double condyle = std::exp(-std::pow((y - 10.0) / 26.0, 2));
  const double tip = std::exp(-std::pow((y - 2.0) / 14.0, 2));  // strongest at the end
  return 0.18 * std::cos(2.0 * theta + 0.7) * condyle +
         0.16 * std::cos(theta - 0.4) * condyle -
         0.16 * std::exp(1.8 * (std::cos(theta - 2.25) - 1.0)) * condyle -
         0.22 * std::exp(2.5 * (std::cos(theta + 0.9) - 1.0)) * tip +
         0.05 * std::sin(3.0 * theta + y / 30.0);
}

// Revolved tube around centerline(y) between y0 and y1. ys need not be
// uniform; radius_fn(y, theta) gives the local radius.
void revolve(TriangleMesh& mesh, const std::vector<double>& ys, int n_theta,
             const std::function<double(double, double)>& radius_fn, PartTag tag) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (double y : ys) {
    const Eigen::Vector3d c = centerline(y);
    for (int j = 0; j < n_theta; ++j) {
      const double th = 2.0 * kPi * j / n_theta;
      const double r = radius_fn(y, th);
      mesh.vertices.push_back(c + Eigen::Vector3d(r * std::cos(th), 0.0, r * std::sin(th)));
    }
  }
  const int rings = static_cast<int>(ys.size());
  for (int i = 0; i + 1 < rings; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const std::uint32_t a = base + i * n_theta + j;
      const std::uint32_t b = base + i * n_theta + (j + 1) % n_theta;
      const std::uint32_t c = base + (i + 1) * n_theta + j;
      const std::uint32_t d = base + (i + 1) * n_theta + (j + 1) % n_theta;
      mesh.add_triangle(a, b, c, tag);
      mesh.add_triangle(b, d, c, tag);
    }
  }
}

void cap(TriangleMesh& mesh, std::uint32_t ring_start, int n_theta,
         const Eigen::Vector3d& apex, PartTag tag, bool flip) {
  const auto apex_idx = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back(apex);
  for (int j = 0; j < n_theta; ++j) {
    const std::uint32_t a = ring_start + j;
    const std::uint32_t b = ring_start + (j + 1) % n_theta;
    if (flip)
      mesh.add_triangle(b, a, apex_idx, tag);
    else
      mesh.add_triangle(a, b, apex_idx, tag);
  }
}

void add_sphere(TriangleMesh& mesh, const Eigen::Vector3d& center, double radius, int n_lat,
                int n_lon, PartTag tag,
                const std::function<double(double, double)>& bump = nullptr) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (int i = 0; i <= n_lat; ++i) {
    const double phi = kPi * i / n_lat;  // 0 at +y pole
    for (int j = 0; j < n_lon; ++j) {
      const double th = 2.0 * kPi * j / n_lon;
      double r = radius;
      if (bump) r *= 1.0 + bump(phi, th);
      mesh.vertices.push_back(center + r * Eigen::Vector3d(std::sin(phi) * std::cos(th),
                                                           std::cos(phi),
                                                           std::sin(phi) * std::sin(th)));
    }
  }
  for (int i = 0; i < n_lat; ++i) {
    for (int j = 0; j < n_lon; ++j) {
      const std::uint32_t a = base + i * n_lon + j;
      const std::uint32_t b = base + i * n_lon + (j + 1) % n_lon;
      const std::uint32_t c = base + (i + 1) * n_lon + j;
      const std::uint32_t d = base + (i + 1) * n_lon + (j + 1) % n_lon;
      mesh.add_triangle(a, b, c, tag);
      mesh.add_triangle(b, d, c, tag);
    }
  }
}

void add_capsule(TriangleMesh& mesh, const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                 double radius, PartTag tag) {
  // crude capsule: tube + end spheres
  const Eigen::Vector3d axis = (p1 - p0).normalized();
  Eigen::Vector3d u = axis.cross(Eigen::Vector3d::UnitX());
  if (u.norm() < 0.1) u = axis.cross(Eigen::Vector3d::UnitY());
  u.normalize();
  const Eigen::Vector3d v = axis.cross(u);
  const int n_theta = 10, n_len = 4;
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (int i = 0; i <= n_len; ++i) {
    const Eigen::Vector3d c = p0 + (p1 - p0) * (double(i) / n_len);
    for (int j = 0; j < n_theta; ++j) {
      const double th = 2.0 * kPi * j / n_theta;
      mesh.vertices.push_back(c + radius * (std::cos(th) * u + std::sin(th) * v));
    }
  }
  for (int i = 0; i < n_len; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const std::uint32_t a = base + i * n_theta + j;
      const std::uint32_t b = base + i * n_theta + (j + 1) % n_theta;
      const std::uint32_t c = base + (i + 1) * n_theta + j;
      const std::uint32_t d = base + (i + 1) * n_theta + (j + 1) % n_theta;
      mesh.add_triangle(a, b, c, tag);
      mesh.add_triangle(b, d, c, tag);
    }
  }
  add_sphere(mesh, p0, radius, 4, n_theta, tag);
  add_sphere(mesh, p1, radius, 4, n_theta, tag);
}

std::vector<double> femur_rings() {
  std::vector<double> ys;
  // dense over the exposed/condyle region, sparser up the shaft
  for (double y = -12.0; y < 100.0; y += 2.5) ys.push_back(y);
  for (double y = 100.0; y <= 404.0; y += 8.0) ys.push_back(y);
  return ys;
}

}  // namespace

geom::TriangleMesh make_femur_mesh() {
  TriangleMesh mesh;
  const auto ys = femur_rings();
  const int n_theta = 36;
  revolve(mesh, ys, n_theta,
          [](double y, double th) { return femur_base_radius(y) * (1.0 + femur_bump(y, th)); },
          PartTag::Femur);
  // distal cap
  cap(mesh, 0, n_theta, centerline(-12.0) + Eigen::Vector3d(0.0, -9.0, 0.0), PartTag::Femur,
      true);
  // proximal cap + femoral head
  const auto last_ring = static_cast<std::uint32_t>((ys.size() - 1) * n_theta);
  cap(mesh, last_ring, n_theta, centerline(404.0) + Eigen::Vector3d(0.0, 7.0, 0.0),
      PartTag::Femur, false);
  add_sphere(mesh, femur_hip_center(), 23.0, 10, 16, PartTag::Femur);
  return mesh;
}

Eigen::Vector3d femur_hip_center() { return centerline(396.0) + Eigen::Vector3d(0.0, 0.0, 8.0); }

Eigen::Vector3d femur_centerline(double y) { return centerline(y); }

Eigen::Vector3d femur_exposure_center() { return centerline(30.0); }

// past the funnel rim (y=104): oblique views see bone slightly under the
// rim, and every rendered femur pixel must have a true correspondence on
// the digitised reference
double femur_digitize_y_max() { return 130.0; }

geom::TriangleMesh make_skin_mesh() {
  TriangleMesh mesh;
  // retraction funnel: collapses toward the bone at the distal edge
  std::vector<double> ys;
  for (double y = 104.0; y <= 408.0; y += 12.0) ys.push_back(y);
  revolve(mesh, ys, 28,
          [](double y, double th) {
            const double open = std::clamp((y - 104.0) / 16.0, 0.0, 1.0);  // 0 at rim
            const double rim = 28.0, full = 52.0 + 4.0 * std::sin(2.0 * th + 1.0);
            return rim + (full - rim) * open + 3.0 * std::sin(y / 47.0);
          },
          PartTag::NotFemur);
  return mesh;
}

geom::TriangleMesh make_tibia_mesh() {
  TriangleMesh mesh;
  std::vector<double> ys;
  for (double y = -190.0; y <= -26.0; y += 10.0) ys.push_back(y);
  revolve(mesh, ys, 20,
          [](double y, double th) {
            return 13.0 + 2.0 * std::sin(2.0 * th) + 5.0 * std::exp(-std::pow((y + 34.0) / 14.0, 2));
          },
          PartTag::NotFemur);
  cap(mesh, 0, 20, centerline(-190.0) + Eigen::Vector3d(0.0, -6.0, 0.0), PartTag::NotFemur, true);
  const auto last_ring = static_cast<std::uint32_t>((ys.size() - 1) * 20);
  cap(mesh, last_ring, 20, centerline(-26.0) + Eigen::Vector3d(0.0, 5.0, 0.0), PartTag::NotFemur,
      false);
  return mesh;
}

std::vector<geom::TriangleMesh> make_occluder_meshes() {
  std::vector<TriangleMesh> out;
  const PartTag tag = PartTag::Occluder;

  {  // slender tool shaft
    TriangleMesh m;
    add_capsule(m, {0, 0, 0}, {0, 0, 120}, 4.5, tag);
    out.push_back(std::move(m));
  }
  {  // paddle / retractor blade
    TriangleMesh m = make_box_mesh({13.0, 4.0, 40.0}, tag);
    for (auto& v : m.vertices) v.z() += 40.0;
    out.push_back(std::move(m));
  }
  {  // two fingers
    TriangleMesh m;
    add_capsule(m, {0, 0, 0}, {10, 4, 78}, 8.0, tag);
    add_capsule(m, {19, 0, 6}, {26, 6, 80}, 7.5, tag);
    out.push_back(std::move(m));
  }
  {  // ball probe
    TriangleMesh m;
    add_sphere(m, {0, 0, 14}, 12.0, 6, 12, tag);
    add_capsule(m, {0, 0, 22}, {0, 0, 110}, 3.0, tag);
    out.push_back(std::move(m));
  }
  {  // hook
    TriangleMesh m;
    add_capsule(m, {0, 0, 0}, {0, 0, 70}, 4.0, tag);
    add_capsule(m, {0, 0, 70}, {45, 0, 78}, 4.0, tag);
    out.push_back(std::move(m));
  }
  {  // palm-ish blob
    TriangleMesh m;
    add_sphere(m, {0, 0, 22}, 24.0, 8, 14, tag, [](double phi, double th) {
      return 0.18 * std::sin(3.0 * th + phi) + 0.12 * std::cos(2.0 * phi);
    });
    out.push_back(std::move(m));
  }
  return out;
}

geom::TriangleMesh make_room_mesh(double half) {
  TriangleMesh m = make_box_mesh({half, half, half}, PartTag::Background);
  // flip windings so faces point inward
  for (auto& t : m.triangles) std::swap(t[1], t[2]);
  return m;
}

geom::TriangleMesh make_box_mesh(const Eigen::Vector3d& h, geom::PartTag tag) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({(i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                          (i & 4) ? h.z() : -h.z()});
  }
  const int faces[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& f : faces) {
    m.add_triangle(f[0], f[1], f[2], tag);
    m.add_triangle(f[0], f[2], f[3], tag);
  }
  return m;
}

geom::PointCloud sample_surface(const geom::TriangleMesh& mesh, double spacing_mm,
                                geom::PartTag tag, double y_max, Rng& rng) {
  geom::PointCloud cloud;
  const double density = 1.0 / (spacing_mm * spacing_mm);
  for (size_t tri = 0; tri < mesh.triangle_count(); ++tri) {
    if (mesh.tags[tri] != tag) continue;
    const Eigen::Vector3d a = mesh.triangle_vertex(tri, 0);
    const Eigen::Vector3d b = mesh.triangle_vertex(tri, 1);
    const Eigen::Vector3d c = mesh.triangle_vertex(tri, 2);
    if ((a.y() + b.y() + c.y()) / 3.0 > y_max) continue;
    const double expect = mesh.triangle_area(tri) * density;
    int count = static_cast<int>(expect);
    if (rng.uniform() < expect - count) ++count;
    for (int i = 0; i < count; ++i) {
      const double r1 = std::sqrt(rng.uniform());
      const double r2 = rng.uniform();
      cloud.points.push_back(a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2));
    }
  }
  return cloud;
}

}  // namespace boneloc::synthcam
