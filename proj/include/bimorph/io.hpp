// bimorph - file formats: trajectory/cloud/trace CSV, design JSON, series
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bimorph/chain.hpp"
#include "bimorph/data_pipeline.hpp"
#include "bimorph/design_opt.hpp"
#include "bimorph/dexterity.hpp"
#include "bimorph/motion_opt.hpp"

namespace bimorph {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form of a double, locale independent.
std::string format_double(double v);

/// Locale-independent parse; throws IoError on junk.
double parse_double(const std::string& s);

/// Canonical unit quaternion [w,x,y,z] of a rotation, w >= 0.
Eigen::Vector4d quaternion_of(const Mat3& r);
Mat3 rotation_of_quaternion(const Eigen::Vector4d& wxyz);

// Trajectory CSV, header: t,arm,x,y,z,qw,qx,qy,qz (arm in {L,R}, quaternion
// normalized with w >= 0, UTF-8, LF endings, '.' decimals).
void write_trajectory_csv(const std::filesystem::path& path,
                          const RawTrajectory& traj);
RawTrajectory read_trajectory_csv(const std::filesystem::path& path,
                                  TaskLabel label);

// Pose cloud CSV, header: arm,x,y,z,qw,qx,qy,qz,weight. Clouds are pooled
// into the left frame, so the arm column is always L.
void write_cloud_csv(const std::filesystem::path& path, const PoseCloud& cloud);
PoseCloud read_cloud_csv(const std::filesystem::path& path);

// Annealing trace CSV, header: iter,cost,accepted,temperature,best_cost.
void write_anneal_trace_csv(const std::filesystem::path& path,
                            const AnnealTrace& trace);

// Motion trace CSV, header: t,seg,q_1..q_7,dext,H,scaleK. One row per
// segment per step; the base rows leave q_7 empty; dext is the trace-wide
// normalized composite of that step.
void write_motion_trace_csv(const std::filesystem::path& path,
                            const MotionTrace& trace);

// Dexterity report CSV (per point) and JSON summary block.
void write_dexterity_csv(const std::filesystem::path& path,
                         const DexterityReport& report);
Json dexterity_summary_json(const DexterityReport& report);

/// Two-column whitespace series for generic plotting tools.
void write_series(const std::filesystem::path& path,
                  const std::vector<std::pair<double, double>>& xy);

// Bilateral design file (JSON): per-joint axis/point/limits of the arm,
// its home pose, base offset, center distance and tool offset.
void write_design_json(const std::filesystem::path& path,
                       const BilateralDesign& design);
BilateralDesign read_design_json(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace bimorph
