// bimorph - task trajectory synthesis and pose-cloud preprocessing
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "bimorph/se3.hpp"

namespace bimorph {

enum class TaskLabel { pick_place, suturing, cutting, path_tracking };

/// Throws UnknownLabel.
TaskLabel parse_task_label(const std::string& s);
std::string to_string(TaskLabel label);
inline constexpr TaskLabel kAllTaskLabels[] = {
    TaskLabel::pick_place, TaskLabel::suturing, TaskLabel::cutting,
    TaskLabel::path_tracking};

struct TrajectorySample {
  double t = 0.0;  // seconds
  Pose left;
  Pose right;
};

struct RawTrajectory {
  std::vector<TrajectorySample> samples;
  TaskLabel label = TaskLabel::pick_place;

  /// Timestamps must be strictly increasing.
  void validate() const;
};

// Local pose variations relative to a moving anchor, pooled across arms
// (right-arm samples are mirrored into the left frame). Weights sum to 1.
struct PoseCloud {
  std::vector<Pose> samples;
  std::vector<double> weights;
  std::set<TaskLabel> sources;

  int size() const { return static_cast<int>(samples.size()); }
  Vec3 mean_translation() const;
  void validate() const;
};

struct GeneratorSettings {
  double sample_rate = 50.0;  // Hz
  double duration = 20.0;     // seconds
};

/// Deterministic synthetic trajectory for one task class. Scales encode the
/// class contrasts: pick_place hops across a 10 cm cube, suturing sweeps
/// +/-60 deg inside a 2 cm cube, cutting follows a planar path at fixed
/// pitch, path_tracking runs a 3 cm Lissajous with tangent-aligned tool.
RawTrajectory synthesize_task(TaskLabel label, const GeneratorSettings& gen,
                              std::uint64_t rng_seed);

/// Re-express poses relative to the mean pose of consecutive time windows
/// (translation mean, chordal rotation mean), pool both arms (right
/// mirrored across x = 0), then center translations globally. Output
/// translation mean is zero. Throws EmptyWindow when the window is shorter
/// than the sampling interval.
PoseCloud extract_local_variation(const RawTrajectory& traj,
                                  double window_seconds);

/// Voxelize translations at grid_cell and draw target_count samples evenly
/// across occupied voxels (round-robin voxels, uniform member pick, with
/// replacement). Every output pose is a member of the input; weights become
/// 1/target_count.
PoseCloud cluster_resample(const PoseCloud& cloud, double grid_cell,
                           int target_count, std::uint64_t rng_seed);

/// Concatenate clouds; weights renormalized to sum 1.
PoseCloud merge_clouds(const std::vector<PoseCloud>& clouds);

/// Occupancy ratio max/min over voxels occupied by the cloud (diagnostic).
double occupancy_ratio(const PoseCloud& cloud, double grid_cell);

}  // namespace bimorph
