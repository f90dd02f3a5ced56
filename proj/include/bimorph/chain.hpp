// bimorph - manipulator descriptions, PoE forward kinematics, Jacobians
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Core>

#include "bimorph/se3.hpp"

namespace bimorph {

using JointVector = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

// One revolute joint: spatial axis direction, a point the axis passes
// through (both in the chain's base frame) and position limits.
struct JointSpec {
  Vec3 axis_direction = Vec3::UnitZ();  // unit vector
  Vec3 axis_point = Vec3::Zero();       // meters
  double lower = -M_PI;
  double upper = M_PI;

  /// Spatial screw (w, -w x c) of the axis.
  Twist screw() const {
    return {axis_direction, -axis_direction.cross(axis_point)};
  }
};

// A serial chain: ordered joints plus the home (zero-configuration)
// end-effector pose. Arms in this project are 7-DOF with the last three
// axes intersecting in one point (spherical-wrist style constraint); the
// global positioner is a plain 6-DOF chain.
class ChainDesign {
 public:
  ChainDesign() = default;
  ChainDesign(std::vector<JointSpec> joints, const Pose& home,
              int wrist_index = -1)
      : joints_(std::move(joints)), home_(home), wrist_index_(wrist_index) {}

  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const JointSpec& joint(int i) const { return joints_.at(i); }
  const Pose& home() const { return home_; }
  /// 0-based index of the first wrist joint, -1 if the chain has no wrist.
  int wrist_index() const { return wrist_index_; }

  JointVector lower_limits() const;
  JointVector upper_limits() const;

  /// Enforce the 7-DOF arm shape: unit axes, ordered limits, the last three
  /// axis points coincident and their directions mutually non-parallel.
  /// Throws DimensionMismatch / Error on violation.
  void validate_arm() const;

  /// All joints at the limit midpoint shifted? No -- clamp helper.
  JointVector clamp(const JointVector& q) const;

 private:
  std::vector<JointSpec> joints_;
  Pose home_;
  int wrist_index_ = -1;
};

/// Product-of-exponentials forward kinematics: T = prod_i e^{xi_i q_i} * M.
/// Throws DimensionMismatch if |q| != dof.
Pose fk(const ChainDesign& chain, const JointVector& q);

/// Spatial Jacobian; column i is Ad of the partial product of the first
/// i-1 exponentials applied to screw i. Throws DimensionMismatch.
Jacobian spatial_jacobian(const ChainDesign& chain, const JointVector& q);

/// Mirror image of a chain across the plane through the base-frame origin
/// with unit normal n. Axis points reflect; axis directions reflect with a
/// handedness sign flip, so the mirrored chain at the same q traces the
/// mirrored motion: fk(mirror(c), q) == mirror_pose(fk(c, q)).
ChainDesign mirror(const ChainDesign& chain, const Vec3& plane_normal);

/// Rigidly rebase a chain: every axis moves by t, screws become Ad_t xi,
/// home becomes t * home.
ChainDesign rebase(const ChainDesign& chain, const Pose& t);

// Two mirrored arms on a 6-DOF global positioner. `arm` is the single
// optimized morphology in its own base frame with right-arm chirality; the
// left arm is its reflection across the sagittal (x = 0) plane of the
// positioner's end-effector frame B. Arms mount at
// base_offset +/- (center_distance / 2) x_B.
struct BilateralDesign {
  ChainDesign arm;
  Vec3 base_offset = Vec3(0.0, 0.0, 0.05);  // d-bar, frame B
  double center_distance = 0.30;
  Vec3 tool_offset = Vec3(0.0, 0.0, 0.10);  // right arm; left is mirrored
  ChainDesign base_chain = default_base_chain();

  /// Conventional shoulder-elbow-wrist positioner, 0.4 m / 0.4 m links.
  static ChainDesign default_base_chain();

  /// Arm chains expressed in the positioner end-effector frame B.
  ChainDesign right_chain_in_base() const;
  ChainDesign left_chain_in_base() const;

  Vec3 left_tool_offset() const { return mirror_point(tool_offset, Vec3::UnitX()); }

  /// Dexterous wrist anchor points (first wrist joint axis point) in frame B.
  Vec3 right_wrist_point_in_base() const;
  Vec3 left_wrist_point_in_base() const;

  int dof() const { return base_chain.dof() + 2 * arm.dof(); }
};

/// Positioner end-effector pose T_sk.
Pose base_pose(const BilateralDesign& sys, const JointVector& q_base);

Pose left_ee_world(const BilateralDesign& sys, const JointVector& q_base,
                   const JointVector& q_left);
Pose right_ee_world(const BilateralDesign& sys, const JointVector& q_base,
                    const JointVector& q_right);

/// Block spatial Jacobian of the tree (12 x 20 for 6+7+7):
///   [ J_K  Ad_{T_sk} J_L      0        ]
///   [ J_K      0         Ad_{T_sk} J_R ]
/// Row blocks are the left / right end-effector spatial twists; the shared
/// base block makes positioner motion move both arms; cross-arm blocks are
/// exactly zero. Throws DimensionMismatch.
Eigen::MatrixXd tree_jacobian(const BilateralDesign& sys,
                              const JointVector& q_base,
                              const JointVector& q_left,
                              const JointVector& q_right);

}  // namespace bimorph
