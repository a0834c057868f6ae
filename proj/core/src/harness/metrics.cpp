#include "boneloc/harness/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "boneloc/error.hpp"

namespace boneloc::harness {

SegMetrics mask_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  if (pred.size() != gt.size()) fail("shape mismatch", "mask_metrics: universe size differs");
  SegMetrics m;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0, g = gt[i] != 0;
    m.tp += p && g;
    m.fp += p && !g;
    m.fn += !p && g;
    m.tn += !p && !g;
  }
  if (m.tp + m.fp + m.fn == 0) {
    m.iou = 1.0;  // no-error convention for two empty masks
    m.empty_empty = true;
  } else {
    m.iou = double(m.tp) / double(m.tp + m.fp + m.fn);
  }
  return m;
}

double mask_iou(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  return mask_metrics(pred, gt).iou;
}

bool roi_success(const geom::RoiRect& pred, const geom::RoiRect& gt) {
  return geom::rect_iou(pred, gt) > 0.5;
}

PoseError pose_error(const geom::RigidTransform& p, const geom::RigidTransform& p_gt) {
  const geom::RigidTransform err = geom::compose(geom::invert(p_gt), p);
  return {geom::rotation_angle_deg(err), geom::translation_norm_mm(err)};
}

geom::PointCloud gt_surface_transform(const geom::PointCloud& surface_local,
                                      std::span<const geom::RigidTransform> chain) {
  geom::RigidTransform t;
  for (const auto& link : chain) t = geom::compose(t, link);
  geom::PointCloud out = surface_local;
  for (auto& p : out.points) p = t.apply(p);
  return out;
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  a.count = int(values.size());
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / double(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - a.mean) * (v - a.mean);
  a.stddev = values.size() > 1 ? std::sqrt(sq / double(values.size() - 1)) : 0.0;
  return a;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  if (values.size() % 2 == 1) return values[mid];
  const double hi = values[mid];
  std::nth_element(values.begin(), values.begin() + mid - 1, values.end());
  return 0.5 * (values[mid - 1] + hi);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = std::clamp(p, 0.0, 100.0) / 100.0 * double(values.size() - 1);
  const size_t lo = size_t(rank);
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - double(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace boneloc::harness
