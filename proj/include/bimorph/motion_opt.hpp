// bimorph - design-informed differential motion for the base + two-arm tree
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "bimorph/chain.hpp"
#include "bimorph/dexterity.hpp"

namespace bimorph {

using Vec12 = Eigen::Matrix<double, 12, 1>;

struct MotionState {
  JointVector q_base = JointVector::Zero(6);
  JointVector q_left = JointVector::Zero(7);
  JointVector q_right = JointVector::Zero(7);
  double time = 0.0;

  Eigen::VectorXd stacked() const;
};

// Which point the secondary potential tracks per arm. The arm end-effector
// variant is the literal reading of the cost; it is exactly inert in the
// task null space (end-effector positions cannot change there), so the
// design-informed mode tracks the base-carried dexterous wrist point
// instead: the base moves to bring its dexterous zone to the task while
// the arms hold the commanded pose.
enum class TrackedPoint { arm_end_effector, base_dexterous_point };

struct ArmGoal {
  Pose target;                       // desired workspace pose, world frame
  Vec3 q_weight = Vec3::Zero();      // diagonal of Q (positive semidefinite)
  Vec3 tool_offset = Vec3::Zero();   // world-frame tool vector t
};

struct NullSpaceGoal {
  ArmGoal left;
  ArmGoal right;
  TrackedPoint tracked = TrackedPoint::arm_end_effector;
  // Frame-B tracked points for the base_dexterous_point mode (the wrist
  // anchors carried by the positioner); ignored in end-effector mode.
  Vec3 base_point_left = Vec3::Zero();
  Vec3 base_point_right = Vec3::Zero();
};

struct MassSettings {
  JointVector base_diag = JointVector::Constant(6, 10.0);
  JointVector arm_diag = JointVector::Constant(7, 1.0);
  double beta_base = 0.08;   // activation threshold, meters
  double beta_arm = 0.0;
  bool activate_base = true;   // only the positioner is scaled by default
  bool activate_arms = false;
};

struct MotionSettings {
  MassSettings mass;
  double damping = 1e-6;
  double rcond_threshold = 1e-12;  // the 12x12 tree operator is naturally
                                   // spread; damp only near true singularity
};

/// Secondary potential H = sum_i (w_i - (r_i + t_i))' Q_i (w_i - (r_i + t_i))
/// over both arms, with r_i the tracked point of the goal mode.
double nullspace_potential(const MotionState& state, const NullSpaceGoal& goal,
                           const BilateralDesign& sys);

/// Analytic 20-vector gradient of the potential with respect to all joints.
Eigen::VectorXd nullspace_gradient(const MotionState& state,
                                   const NullSpaceGoal& goal,
                                   const BilateralDesign& sys);

struct MassScales {
  double base = 1.0;
  double left = 1.0;
  double right = 1.0;
};

/// Continuous switching law tanh(|w - r| - beta) + 1.5 per activated
/// segment (identity scale otherwise); the base uses the mean of the two
/// arms' workspace distances. Scales are always inside [0.5, 2.5].
MassScales mass_scales(const MotionState& state, const NullSpaceGoal& goal,
                       const BilateralDesign& sys, const MassSettings& mass);

/// Diagonal of the 20x20 block mass matrix after scaling.
Eigen::VectorXd scaled_mass_diag(const MotionState& state,
                                 const NullSpaceGoal& goal,
                                 const BilateralDesign& sys,
                                 const MassSettings& mass);

struct RateSolution {
  Eigen::VectorXd qdot;  // 20
  bool damped = false;   // damped fallback engaged
};

/// Weighted generalized-inverse rate resolution
///   qdot = G V_d - (I - G J) M^-1 grad H,  G = M^-1 J' (J M^-1 J')^-1.
/// The null-space term cannot perturb the end-effector twists and descends
/// H. J qdot reproduces V_d to solver precision unless the damped fallback
/// engages (flagged). Throws NumericallySingular if damping cannot rescue
/// the solve.
RateSolution resolve_rates(const MotionState& state, const Vec12& v_desired,
                           const NullSpaceGoal& goal,
                           const BilateralDesign& sys,
                           const MotionSettings& settings);

struct TraceStep {
  MotionState state;
  Vec12 v_desired = Vec12::Zero();
  Vec12 v_achieved = Vec12::Zero();  // tree Jacobian times the applied rates
  double h_value = 0.0;
  double scale_base = 1.0;
  PointMetrics metrics;  // arm metric terms averaged over the two arms
};

struct MotionTrace {
  std::vector<TraceStep> steps;
  bool informed = false;
};

struct TransitionSettings {
  double kp = 4.0;                        // feedback gain on the error twist
  Vec3 q_weight = Vec3::Constant(400.0);  // informed-mode Q diagonal
  Pose left_target_offset = Pose::from_translation(Vec3(-0.05, 0.0, 0.0));
  Pose right_target_offset = Pose::from_translation(Vec3(0.05, 0.0, 0.0));
  JointVector q_base0 = (Eigen::VectorXd(6) << 0.0, 0.45, -0.9, 0.0, 0.6, 0.0)
                            .finished();
  MotionSettings motion;
  IkSettings init_ik;  // used once to place the arms on the first target
};

/// Drive both arm end-effectors along a straight-line workspace
/// interpolation w1 -> w2 (feedforward twist plus proportional feedback),
/// integrating the resolved rates with explicit Euler. When informed, the
/// secondary goal keeps each dexterous wrist point (given in the arm frame)
/// under the moving task so the base chases it; otherwise the null-space
/// term is exactly zero. Records the per-step dexterity terms of both arms.
MotionTrace simulate_transition(const BilateralDesign& sys,
                                const Vec3& dexterous_wrist_point,
                                const Pose& w1, const Pose& w2,
                                double duration, double dt, bool informed,
                                const TransitionSettings& settings = {});

/// Normalized composite report over the steps of a motion trace.
DexterityReport evaluate_trace(const MotionTrace& trace);

/// Reports for two traces normalized against their pooled term ranges, so
/// the composite spreads are on one scale and the stds are comparable.
std::pair<DexterityReport, DexterityReport> compare_traces(
    const MotionTrace& a, const MotionTrace& b);

}  // namespace bimorph
