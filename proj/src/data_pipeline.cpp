// bimorph - task trajectory synthesis and pose-cloud preprocessing
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

namespace bimorph {

TaskLabel parse_task_label(const std::string& s) {
  if (s == "pick_place") return TaskLabel::pick_place;
  if (s == "suturing") return TaskLabel::suturing;
  if (s == "cutting") return TaskLabel::cutting;
  if (s == "path_tracking") return TaskLabel::path_tracking;
  throw UnknownLabel("unknown task label: " + s);
}

std::string to_string(TaskLabel label) {
  switch (label) {
    case TaskLabel::pick_place: return "pick_place";
    case TaskLabel::suturing: return "suturing";
    case TaskLabel::cutting: return "cutting";
    case TaskLabel::path_tracking: return "path_tracking";
  }
  throw UnknownLabel("unknown task label value");
}

void RawTrajectory::validate() const {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw Error("trajectory timestamps must be strictly increasing");
    }
  }
}

Vec3 PoseCloud::mean_translation() const {
  Vec3 m = Vec3::Zero();
  for (const Pose& p : samples) m += p.translation();
  return samples.empty() ? m : Vec3(m / static_cast<double>(samples.size()));
}

void PoseCloud::validate() const {
  if (samples.size() != weights.size()) {
    throw Error("pose cloud weights/samples size mismatch");
  }
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (!samples.empty() && std::abs(sum - 1.0) > 1e-9) {
    throw Error("pose cloud weights must sum to 1");
  }
}

namespace {

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

// Orientation interpolation through the relative logarithm.
Mat3 slerp_rotation(const Mat3& a, const Mat3& b, double u) {
  const ScrewAngle rel = log_pose(Pose(Mat3(a.transpose() * b), Vec3::Zero()));
  if (rel.xi.angular.norm() < 0.5) return a;  // relative rotation negligible
  return a * exp_so3(rel.xi.angular, rel.theta * u);
}

struct StreamGen {
  std::mt19937_64 rng;
  explicit StreamGen(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  Vec3 unit_vector() {
    // Marsaglia-free: spherical angles from two uniforms.
    const double az = uniform(-M_PI, M_PI);
    const double cp = uniform(-1.0, 1.0);
    const double sp = std::sqrt(std::max(0.0, 1.0 - cp * cp));
    return Vec3(std::cos(az) * sp, std::sin(az) * sp, cp);
  }
};

// Hops between jittered corners of a cube (10 cm side), small tilts.
std::vector<Pose> gen_pick_place(StreamGen& g, int n, double dt,
                                 const Vec3& center) {
  const double half = 0.05;
  const int hops = 9;
  std::vector<Vec3> wp(hops + 1);
  std::vector<Mat3> wr(hops + 1);
  for (int k = 0; k <= hops; ++k) {
    const Vec3 corner((k & 1) ? half : -half, (k & 2) ? half : -half,
                      (k & 4) ? half : -half);
    wp[k] = center + corner;
    wr[k] = exp_so3(g.unit_vector(), g.uniform(-0.25, 0.25));
  }
  std::vector<Pose> out(n);
  const double total = n * dt;
  for (int i = 0; i < n; ++i) {
    const double s = (i * dt) / total * hops;
    const int k = std::min(static_cast<int>(s), hops - 1);
    const double u = smoothstep(s - k);
    out[i] = Pose(slerp_rotation(wr[k], wr[k + 1], u),
                  wp[k] + u * (wp[k + 1] - wp[k]));
  }
  return out;
}

// +/-60 deg sweeps about a slowly precessing tool axis, 2 cm cube.
std::vector<Pose> gen_suturing(StreamGen& g, int n, double dt,
                               const Vec3& center) {
  const double amp = 0.008;
  Vec3 freq(g.uniform(0.10, 0.16), g.uniform(0.17, 0.23),
            g.uniform(0.24, 0.30));
  Vec3 phase(g.uniform(0, 2 * M_PI), g.uniform(0, 2 * M_PI),
             g.uniform(0, 2 * M_PI));
  const double sweep_hz = g.uniform(0.20, 0.30);
  const double sweep_phase = g.uniform(0, 2 * M_PI);
  const double precess_hz = 0.05;
  std::vector<Pose> out(n);
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    Vec3 p = center;
    for (int a = 0; a < 3; ++a)
      p[a] += amp * std::sin(2 * M_PI * freq[a] * t + phase[a]);
    const double pre = 2 * M_PI * precess_hz * t;
    const Vec3 tool_axis(std::sin(0.4) * std::cos(pre),
                         std::sin(0.4) * std::sin(pre), std::cos(0.4));
    const double sweep =
        (M_PI / 3.0) * std::sin(2 * M_PI * sweep_hz * t + sweep_phase);
    out[i] = Pose(exp_so3(tool_axis, sweep), p);
  }
  return out;
}

// Planar sinusoidal path, tool yaw tangent-aligned, pitch fixed.
std::vector<Pose> gen_cutting(StreamGen& g, int n, double dt,
                              const Vec3& center) {
  const double len = 0.06, amp = 0.012;
  const double wiggles = g.uniform(2.0, 3.0);
  const double pitch = 0.5;
  std::vector<Pose> out(n);
  const double total = n * dt;
  for (int i = 0; i < n; ++i) {
    const double u = (i * dt) / total;  // back and forth along the cut
    const double s = 0.5 - 0.5 * std::cos(2 * M_PI * u);
    const double x = (s - 0.5) * len;
    const double y = amp * std::sin(2 * M_PI * wiggles * s);
    const double dy_dx = amp * 2 * M_PI * wiggles *
                         std::cos(2 * M_PI * wiggles * s) / len;
    const double yaw = std::atan2(dy_dx, 1.0);
    out[i] = Pose(exp_so3(Vec3::UnitZ(), yaw) * exp_so3(Vec3::UnitY(), pitch),
                  center + Vec3(x, y, 0.0));
  }
  return out;
}

// 3-D Lissajous in a 3 cm cube, tool z-axis aligned to the path tangent.
std::vector<Pose> gen_path_tracking(StreamGen& g, int n, double dt,
                                    const Vec3& center) {
  const double amp = 0.014;
  Vec3 freq(0.13, 0.19, 0.29);
  Vec3 phase(g.uniform(0, 2 * M_PI), g.uniform(0, 2 * M_PI),
             g.uniform(0, 2 * M_PI));
  const Vec3 ref = Vec3(0.23, 0.31, 0.92).normalized();
  std::vector<Pose> out(n);
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    Vec3 p, v;
    for (int a = 0; a < 3; ++a) {
      const double w = 2 * M_PI * freq[a];
      p[a] = amp * std::sin(w * t + phase[a]);
      v[a] = amp * w * std::cos(w * t + phase[a]);
    }
    Vec3 z = v.norm() > 1e-12 ? Vec3(v.normalized()) : Vec3::UnitZ();
    Vec3 x = (ref - ref.dot(z) * z);
    x = x.norm() > 1e-9 ? Vec3(x.normalized()) : Vec3::UnitX();
    Mat3 r;
    r.col(0) = x;
    r.col(1) = z.cross(x);
    r.col(2) = z;
    out[i] = Pose(r, center + p);
  }
  return out;
}

}  // namespace

RawTrajectory synthesize_task(TaskLabel label, const GeneratorSettings& gen,
                              std::uint64_t rng_seed) {
  const int n = std::max(2, static_cast<int>(gen.sample_rate * gen.duration));
  const double dt = 1.0 / gen.sample_rate;
  StreamGen gl(rng_seed * 2 + 1), gr(rng_seed * 2 + 2);
  const Vec3 cl(-0.15, 0.0, 0.0), cr(0.15, 0.0, 0.0);

  std::vector<Pose> left, right;
  switch (label) {
    case TaskLabel::pick_place:
      left = gen_pick_place(gl, n, dt, cl);
      right = gen_pick_place(gr, n, dt, cr);
      break;
    case TaskLabel::suturing:
      left = gen_suturing(gl, n, dt, cl);
      right = gen_suturing(gr, n, dt, cr);
      break;
    case TaskLabel::cutting:
      left = gen_cutting(gl, n, dt, cl);
      right = gen_cutting(gr, n, dt, cr);
      break;
    case TaskLabel::path_tracking:
      left = gen_path_tracking(gl, n, dt, cl);
      right = gen_path_tracking(gr, n, dt, cr);
      break;
    default:
      throw UnknownLabel("synthesize_task: bad label");
  }

  RawTrajectory traj;
  traj.label = label;
  traj.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    traj.samples[i] = {i * dt, left[i], right[i]};
  }
  return traj;
}

PoseCloud extract_local_variation(const RawTrajectory& traj,
                                  double window_seconds) {
  traj.validate();
  if (traj.samples.size() < 2) {
    throw Error("extract_local_variation: need at least 2 samples");
  }
  if (!(window_seconds > 0.0)) {
    throw Error("extract_local_variation: window must be positive");
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    min_gap = std::min(min_gap, traj.samples[i].t - traj.samples[i - 1].t);
  }
  if (window_seconds < min_gap) {
    throw EmptyWindow("window shorter than the sampling interval");
  }

  PoseCloud cloud;
  cloud.sources = {traj.label};

  const double t0 = traj.samples.front().t;
  std::size_t begin = 0;
  while (begin < traj.samples.size()) {
    const int k =
        static_cast<int>(std::floor((traj.samples[begin].t - t0) /
                                    window_seconds));
    const double t_end = t0 + (k + 1) * window_seconds;
    std::size_t end = begin;
    while (end < traj.samples.size() && traj.samples[end].t < t_end) ++end;

    for (int arm = 0; arm < 2; ++arm) {
      Mat3 rsum = Mat3::Zero();
      Vec3 tsum = Vec3::Zero();
      for (std::size_t i = begin; i < end; ++i) {
        const Pose& p = arm == 0 ? traj.samples[i].left : traj.samples[i].right;
        rsum += p.rotation();
        tsum += p.translation();
      }
      const double cnt = static_cast<double>(end - begin);
      const Pose mean(orthonormalize(rsum / cnt), tsum / cnt);
      const Pose mean_inv = mean.inverse();
      for (std::size_t i = begin; i < end; ++i) {
        const Pose& p = arm == 0 ? traj.samples[i].left : traj.samples[i].right;
        Pose rel = mean_inv * p;
        if (arm == 1) rel = mirror_pose(rel, Vec3::UnitX());
        cloud.samples.push_back(rel);
      }
    }
    begin = end;
  }

  // Center translations globally; a second pass removes the summation
  // residue so the mean is zero to machine precision.
  for (int pass = 0; pass < 2; ++pass) {
    const Vec3 m = cloud.mean_translation();
    for (Pose& p : cloud.samples) {
      p = Pose(p.rotation(), p.translation() - m);
    }
  }
  cloud.weights.assign(cloud.samples.size(),
                       1.0 / static_cast<double>(cloud.samples.size()));
  return cloud;
}

namespace {
using VoxelKey = std::tuple<long long, long long, long long>;

VoxelKey voxel_of(const Vec3& p, double cell) {
  return {static_cast<long long>(std::floor(p.x() / cell)),
          static_cast<long long>(std::floor(p.y() / cell)),
          static_cast<long long>(std::floor(p.z() / cell))};
}

std::map<VoxelKey, std::vector<int>> voxelize(const PoseCloud& cloud,
                                              double cell) {
  std::map<VoxelKey, std::vector<int>> voxels;
  for (int i = 0; i < cloud.size(); ++i) {
    voxels[voxel_of(cloud.samples[i].translation(), cell)].push_back(i);
  }
  return voxels;
}
}  // namespace

PoseCloud cluster_resample(const PoseCloud& cloud, double grid_cell,
                           int target_count, std::uint64_t rng_seed) {
  if (cloud.size() == 0) throw Error("cluster_resample: empty cloud");
  if (!(grid_cell > 0.0)) throw Error("cluster_resample: grid_cell <= 0");

  const auto voxels = voxelize(cloud, grid_cell);
  std::vector<const std::vector<int>*> buckets;
  buckets.reserve(voxels.size());
  for (const auto& [key, members] : voxels) buckets.push_back(&members);

  std::mt19937_64 rng(rng_seed);
  // Round-robin over a shuffled voxel order; with fewer draws than voxels a
  // sorted order would keep a spatially contiguous slab only.
  std::shuffle(buckets.begin(), buckets.end(), rng);
  PoseCloud out;
  out.sources = cloud.sources;
  out.samples.reserve(target_count);
  for (int d = 0; d < target_count; ++d) {
    const std::vector<int>& members = *buckets[d % buckets.size()];
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    out.samples.push_back(cloud.samples[members[pick(rng)]]);
  }
  out.weights.assign(out.samples.size(), 1.0 / target_count);
  return out;
}

PoseCloud merge_clouds(const std::vector<PoseCloud>& clouds) {
  PoseCloud out;
  double total = 0.0;
  for (const PoseCloud& c : clouds) {
    for (int i = 0; i < c.size(); ++i) {
      out.samples.push_back(c.samples[i]);
      out.weights.push_back(c.weights[i]);
      total += c.weights[i];
    }
    out.sources.insert(c.sources.begin(), c.sources.end());
  }
  if (total > 0.0) {
    for (double& w : out.weights) w /= total;
  }
  return out;
}

double occupancy_ratio(const PoseCloud& cloud, double grid_cell) {
  const auto voxels = voxelize(cloud, grid_cell);
  if (voxels.empty()) return 0.0;
  std::size_t lo = cloud.samples.size(), hi = 0;
  for (const auto& [key, members] : voxels) {
    lo = std::min(lo, members.size());
    hi = std::max(hi, members.size());
  }
  return static_cast<double>(hi) / static_cast<double>(lo);
}

}  // namespace bimorph
