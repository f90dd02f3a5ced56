// bimorph - simulated-annealing morphology optimization of the 7-DOF arm
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "bimorph/chain.hpp"
#include "bimorph/data_pipeline.hpp"
#include "bimorph/ik.hpp"

namespace bimorph {

// The optimizer state for one symmetric arm: 7 axis directions as spherical
// angles, 5 distinct axis points (the last three joints share the wrist
// point), and the base offset. 2*7 + 3*5 + 3 = 32 scalars.
struct DesignVector {
  // (azimuth, polar); direction = (cos az sin p, sin az sin p, cos p).
  std::array<Eigen::Vector2d, 7> axis_angles;
  std::array<Vec3, 5> axis_points;  // c1..c4 and the shared wrist point c5
  Vec3 base_offset = Vec3::Zero();

  static constexpr int kScalarCount = 32;

  Vec3 axis_direction(int joint) const;
  const Vec3& axis_point(int joint) const {
    return axis_points[std::min(joint, 4)];
  }
  const Vec3& wrist_point() const { return axis_points[4]; }

  Eigen::VectorXd to_vector() const;
  static DesignVector from_vector(const Eigen::VectorXd& v);

  /// Wrist axes pairwise non-parallel (|dot| <= 0.999), all axis points in
  /// the 1 m box around the base, point norms non-decreasing along the chain.
  bool satisfies_constraints() const;

  /// Realize as a chain. Home = identity orientation at the wrist point
  /// plus tool_offset; during cost evaluation the tool offset is zero so the
  /// home frame coincides with the wrist anchor.
  ChainDesign to_chain(double joint_limit = 2.967,
                       const Vec3& tool_offset = Vec3::Zero()) const;

  /// Conventional anthropomorphic layout used as the annealer start.
  static DesignVector anthropomorphic();
};

/// Uniform feasible design: random unit axes, box-sampled axis points
/// sorted by distance from the base. Rejection-samples the constraints.
DesignVector random_design(std::mt19937_64& rng);

struct PerturbScales {
  double axis_angle = 0.15;   // rad
  double axis_point = 0.02;   // m
  double base_offset = 0.01;  // m
};

struct AnnealSettings {
  double initial_temp = 1.0;
  double decay_rate = 0.998;  // Temp(i) = initial_temp * decay_rate^i
  int max_iters = 2000;
  PerturbScales scales;
  std::uint64_t rng_seed = 1;
  Vec6 w1_diag = (Vec6() << 1, 1, 1, 0.1, 0.1, 0.1).finished();
  double w2 = 0.01;
  IkSettings ik;          // per-sample solves; capped low, warm-started
  int stall_iters = 200;  // stop after this many non-improving iterations
  double stall_tolerance = 1e-9;
  bool optimize_base_offset = false;  // only with bilateral interaction data

  AnnealSettings() { ik.max_iters = 50; }
};

struct AnnealTraceRow {
  int iter = 0;
  double candidate_cost = 0.0;
  bool accepted = false;
  double temperature = 0.0;
  double best_cost = 0.0;
  double delta = 0.0;  // candidate cost minus the cost it was judged against
};

struct AnnealTrace {
  std::vector<AnnealTraceRow> rows;
};

/// IK-based design cost: anchor the normalized cloud at the candidate's
/// wrist pose (home orientation, wrist point), sweep the samples in order
/// with warm-started IK, and accumulate
///   sum_i dp' W1 dp + w2 |q_i - q_{i-1}|^2
/// where dp is the residual error twist after IK (zero at convergence) and
/// the continuity term starts at the second sample. A NumericallySingular
/// candidate costs +infinity.
double design_cost(const DesignVector& design, const PoseCloud& cloud,
                   const IkSettings& ik_settings, const Vec6& w1_diag,
                   double w2);

/// Gaussian candidate move; per-group sigma scales with
/// temperature/initial_temp. Wrist intersection holds by construction;
/// infeasible draws are retried up to 100 times before
/// ConstraintUnsatisfiable.
DesignVector perturb(const DesignVector& design, double temperature,
                     double initial_temp, const PerturbScales& scales,
                     std::mt19937_64& rng, bool perturb_base_offset = false);

/// Metropolis simulated annealing over designs; returns the best design
/// seen (never merely the last accepted one) and the per-iteration trace.
std::pair<DesignVector, AnnealTrace> anneal(const DesignVector& initial,
                                            const PoseCloud& cloud,
                                            const AnnealSettings& settings);

}  // namespace bimorph
