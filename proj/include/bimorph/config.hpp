// bimorph - declarative run configuration with a strict JSON schema
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "bimorph/data_pipeline.hpp"
#include "bimorph/design_opt.hpp"
#include "bimorph/ik.hpp"
#include "bimorph/motion_opt.hpp"

namespace bimorph {

// Every module setting in one declarative document. Unknown keys are
// rejected so typos cannot silently fall back to defaults; every run
// archives the resolved form next to its outputs.
struct RunConfig {
  std::uint64_t seed = 20240601;
  int jobs = 1;

  IkSettings ik;  // general-purpose solver settings
  GeneratorSettings generator;

  struct Pipeline {
    double window = 2.0;       // seconds
    double grid_cell = 0.005;  // meters
    int target_count = 500;
  } pipeline;

  AnnealSettings anneal;

  struct DesignParams {
    double joint_limit = 2.967;  // rad, symmetric
    Vec3 base_offset = Vec3(0.0, 0.0, 0.05);
    double center_distance = 0.30;
    Vec3 tool_offset = Vec3(0.0, 0.0, 0.10);
  } design;

  TransitionSettings transition;

  // The transition runs across the sagittal plane; the positioner has full
  // mobility along x at the default bent posture, so the base can chase.
  struct TransitionFixture {
    Pose w1 = Pose::from_translation(Vec3(-0.15, 0.10, 1.30));
    Pose w2 = Pose::from_translation(Vec3(0.15, 0.10, 1.30));
    double duration = 6.0;
    double dt = 0.01;
  } fixture;

  /// Parse and validate; throws ConfigError on unknown keys or bad values.
  static RunConfig from_json(const nlohmann::ordered_json& j);
  static RunConfig load_file(const std::filesystem::path& path);

  /// Resolved (fully explicit) form.
  nlohmann::ordered_json to_json() const;

  /// Realize the configured bilateral system around an optimized arm.
  BilateralDesign make_bilateral(const ChainDesign& arm) const;
  BilateralDesign make_bilateral(const DesignVector& design) const;
};

}  // namespace bimorph
