#pragma once

#include <Eigen/Core>
#include <vector>

#include "boneloc/geom/mesh.hpp"
#include "boneloc/geom/point_cloud.hpp"
#include "boneloc/rng.hpp"

namespace boneloc::synthcam {

/// Canonical procedural knee model, deterministic across runs. The femur
/// model frame has +y running distal -> proximal along the (slightly bowed)
/// shaft centerline; the exposed distal region sits near the origin.

geom::TriangleMesh make_femur_mesh();
geom::TriangleMesh make_skin_mesh();   // retracted soft-tissue funnel, tag NotFemur
geom::TriangleMesh make_tibia_mesh();  // below the joint space, tag NotFemur

/// Center of the femoral head sphere in the femur model frame (mm).
Eigen::Vector3d femur_hip_center();
/// Point on the bowed shaft centerline at height y (model frame, mm).
Eigen::Vector3d femur_centerline(double y);
/// Mid-point of the exposed distal surface; cameras aim here.
Eigen::Vector3d femur_exposure_center();
/// Model-frame y below which the femur surface counts as digitisable.
double femur_digitize_y_max();

/// Hand/tool stand-ins. The tip (contact point) is the local origin and the
/// body extends along +z.
std::vector<geom::TriangleMesh> make_occluder_meshes();

/// Inward-facing room box centered at the origin, tag Background.
geom::TriangleMesh make_room_mesh(double half_size_mm);
/// Axis-aligned box centered at the origin (distractors), given tag.
geom::TriangleMesh make_box_mesh(const Eigen::Vector3d& half_extents, geom::PartTag tag);

/// Uniform-density surface samples (one point per ~spacing_mm^2 cell) over
/// triangles with the given tag whose centroid y <= y_max.
geom::PointCloud sample_surface(const geom::TriangleMesh& mesh, double spacing_mm,
                                geom::PartTag tag, double y_max, Rng& rng);

}  // namespace boneloc::synthcam
