#include "boneloc/harness/track_loop.hpp"

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "boneloc/error.hpp"

namespace boneloc::harness {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct SegPacket {
  int frame = -1;
  reg::SegmentOutcome segments;
  Eigen::Vector3d hip_cam{0, 0, 0};
  geom::RigidTransform pose_gt;
  double stage_a_ms = 0.0;
  bool last = false;
};

/// Single-slot hand-off between the two stages. latest_wins lets a newer
/// packet replace an unconsumed older one (the real-time semantics); without
/// it the producer blocks until the consumer drains the slot.
class HandoffSlot {
public:
  explicit HandoffSlot(bool latest_wins) : latest_wins_(latest_wins) {}

  void push(SegPacket&& packet, std::vector<int>* dropped) {
    std::unique_lock lock(mutex_);
    if (!latest_wins_) {
      can_push_.wait(lock, [&] { return !slot_.has_value(); });
    } else if (slot_ && !slot_->last) {
      dropped->push_back(slot_->frame);
      slot_.reset();
    }
    slot_ = std::move(packet);
    can_pop_.notify_one();
  }

  SegPacket pop() {
    std::unique_lock lock(mutex_);
    can_pop_.wait(lock, [&] { return slot_.has_value(); });
    SegPacket packet = std::move(*slot_);
    slot_.reset();
    can_push_.notify_one();
    return packet;
  }

private:
  bool latest_wins_;
  std::mutex mutex_;
  std::condition_variable can_push_, can_pop_;
  std::optional<SegPacket> slot_;
};

SegPacket run_stage_a(const std::string& dir, int frame, const percept::RoiNet* roinet,
                      const percept::SegNet* segnet, const TrackLoopOptions& opt) {
  const auto t0 = Clock::now();
  SegPacket packet;
  packet.frame = frame;
  const auto capture = synthcam::read_capture(dir);
  packet.pose_gt = capture.pose_gt;
  packet.hip_cam = capture.pose_gt.apply(opt.hip_model);
  packet.segments = reg::segment_capture(capture, roinet, segnet, opt.tracker);
  packet.stage_a_ms = ms_since(t0);
  return packet;
}

}  // namespace

TrackLoopReport track_loop(const std::string& dataset_dir, const percept::RoiNet* roinet,
                           const percept::SegNet* segnet, const reg::ReferenceModel& model,
                           const TrackLoopOptions& opt) {
  const auto manifest = synthcam::load_manifest(dataset_dir);
  if (manifest.captures.empty()) fail("empty dataset", "track_loop: no captures");
  std::vector<std::string> dirs;
  for (const auto& e : manifest.captures) dirs.push_back(dataset_dir + "/" + e.dir);
  const int n = int(dirs.size());

  TrackLoopReport report;
  report.frames.resize(n);
  std::vector<int> dropped;
  std::optional<geom::RigidTransform> prev_pose;

  auto stage_b = [&](SegPacket&& packet) {
    const auto t0 = Clock::now();
    if (packet.frame == 0 && opt.init_gt) prev_pose = packet.pose_gt;
    const auto tracked =
        reg::register_segments(packet.segments, model, packet.hip_cam, prev_pose, opt.tracker);
    if (!tracked.lost) prev_pose = tracked.pose;

    FrameRecord& rec = report.frames[size_t(packet.frame)];
    rec.frame = packet.frame;
    rec.pose = tracked.pose;
    rec.lost = tracked.lost;
    rec.reason = tracked.lost_reason;
    rec.has_gt = true;
    const PoseError err = pose_error(tracked.pose, packet.pose_gt);
    rec.rot_err_deg = err.rot_deg;
    rec.trans_err_mm = err.trans_mm;
    rec.stage_a_ms = packet.stage_a_ms;
    rec.stage_b_ms = ms_since(t0);
    if (tracked.lost) ++report.lost_count;
  };

  const auto loop_start = Clock::now();
  Clock::time_point warmup_end = loop_start;
  int processed = 0;

  if (opt.serial) {
    for (int i = 0; i < n; ++i) {
      stage_b(run_stage_a(dirs[size_t(i)], i, roinet, segnet, opt));
      ++processed;
      if (processed == std::min(opt.warmup_frames, n)) warmup_end = Clock::now();
    }
  } else {
    HandoffSlot slot(opt.latest_wins);
    std::thread producer([&] {
      try {
        for (int i = 0; i < n; ++i) {
          SegPacket packet = run_stage_a(dirs[size_t(i)], i, roinet, segnet, opt);
          packet.last = i == n - 1;
          slot.push(std::move(packet), &dropped);
        }
      } catch (const std::exception& e) {
        SegPacket poison;  // unblock the consumer, surface the failure as lost
        poison.frame = n - 1;
        poison.last = true;
        poison.segments.lost = true;
        poison.segments.lost_reason = std::string("stage-a failure: ") + e.what();
        slot.push(std::move(poison), &dropped);
      }
    });
    bool done = false;
    while (!done) {
      SegPacket packet = slot.pop();
      done = packet.last;
      stage_b(std::move(packet));
      ++processed;
      if (processed == std::min(opt.warmup_frames, n)) warmup_end = Clock::now();
    }
    producer.join();
  }

  for (int frame : dropped) {
    FrameRecord& rec = report.frames[size_t(frame)];
    rec.frame = frame;
    rec.dropped = true;
    rec.reason = "dropped";
  }
  report.dropped_count = int(dropped.size());

  // timing summary, warm-up excluded when the run is long enough
  std::vector<double> a_ms, b_ms, frame_ms;
  const int skip = n > opt.warmup_frames + 5 ? opt.warmup_frames : 0;
  for (int i = 0; i < n; ++i) {
    const auto& rec = report.frames[size_t(i)];
    if (rec.dropped || rec.frame < skip) continue;
    a_ms.push_back(rec.stage_a_ms);
    b_ms.push_back(rec.stage_b_ms);
    frame_ms.push_back(rec.stage_a_ms + rec.stage_b_ms);
  }
  report.timing.measured_frames = int(frame_ms.size());
  report.timing.p50_a_ms = percentile(a_ms, 50);
  report.timing.p95_a_ms = percentile(a_ms, 95);
  report.timing.p50_b_ms = percentile(b_ms, 50);
  report.timing.p95_b_ms = percentile(b_ms, 95);
  report.timing.p50_frame_ms = percentile(frame_ms, 50);
  report.timing.p95_frame_ms = percentile(frame_ms, 95);
  const double span_ms = std::chrono::duration<double, std::milli>(
                             Clock::now() - (skip > 0 ? warmup_end : loop_start))
                             .count();
  const int counted = processed - (skip > 0 ? skip : 0);
  report.timing.rate_hz = span_ms > 0.0 && counted > 0 ? 1000.0 * counted / span_ms : 0.0;
  return report;
}

std::string pose_log_string(const TrackLoopReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "frame";
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) os << ",m" << r << c;
  os << ",rot_err_deg,trans_err_mm,status\n";
  for (const auto& rec : report.frames) {
    os << rec.frame;
    const Eigen::Matrix4d m = rec.pose.matrix();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) os << "," << m(r, c);
    os << ",";
    if (rec.has_gt) os << rec.rot_err_deg;
    os << ",";
    if (rec.has_gt) os << rec.trans_err_mm;
    os << "," << (rec.dropped ? "dropped" : (rec.lost ? "lost" : "ok")) << "\n";
  }
  return os.str();
}

void write_pose_log(const std::string& path, const TrackLoopReport& report) {
  std::ofstream os(path);
  if (!os) fail("io", "cannot write pose log " + path);
  os << pose_log_string(report);
}

}  // namespace boneloc::harness
