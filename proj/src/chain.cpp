// bimorph - manipulator descriptions, PoE forward kinematics, Jacobians
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/chain.hpp"

#include <cmath>
#include <string>

namespace bimorph {

JointVector ChainDesign::lower_limits() const {
  JointVector v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[i].lower;
  return v;
}

JointVector ChainDesign::upper_limits() const {
  JointVector v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[i].upper;
  return v;
}

void ChainDesign::validate_arm() const {
  if (dof() != 7) {
    throw DimensionMismatch("arm chain must have 7 joints, has " +
                            std::to_string(dof()));
  }
  if (wrist_index_ != 4) {
    throw Error("arm chain wrist_index must be 4 (joints 5..7)");
  }
  for (const JointSpec& j : joints_) {
    if (std::abs(j.axis_direction.norm() - 1.0) > 1e-12) {
      throw Error("joint axis direction must be unit length");
    }
    if (!(j.lower < j.upper)) throw Error("joint limits must satisfy lower < upper");
  }
  const Vec3& w5 = joints_[4].axis_point;
  if ((joints_[5].axis_point - w5).norm() > 1e-12 ||
      (joints_[6].axis_point - w5).norm() > 1e-12) {
    throw Error("wrist axis points must coincide");
  }
  for (int a = 4; a < 7; ++a) {
    for (int b = a + 1; b < 7; ++b) {
      if (std::abs(joints_[a].axis_direction.dot(joints_[b].axis_direction)) >
          0.999) {
        throw Error("wrist axes must be mutually non-parallel");
      }
    }
  }
}

JointVector ChainDesign::clamp(const JointVector& q) const {
  JointVector out = q;
  for (int i = 0; i < dof(); ++i) {
    out[i] = std::clamp(out[i], joints_[i].lower, joints_[i].upper);
  }
  return out;
}

Pose fk(const ChainDesign& chain, const JointVector& q) {
  if (q.size() != chain.dof()) {
    throw DimensionMismatch("fk: joint vector size " +
                            std::to_string(q.size()) + " != dof " +
                            std::to_string(chain.dof()));
  }
  Pose t;
  for (int i = 0; i < chain.dof(); ++i) {
    t = t * exp_twist(chain.joint(i).screw(), q[i]);
  }
  return t * chain.home();
}

Jacobian spatial_jacobian(const ChainDesign& chain, const JointVector& q) {
  if (q.size() != chain.dof()) {
    throw DimensionMismatch("spatial_jacobian: joint vector size mismatch");
  }
  Jacobian j(6, chain.dof());
  Pose prefix;  // e^{xi_1 q_1} ... e^{xi_{i-1} q_{i-1}}
  for (int i = 0; i < chain.dof(); ++i) {
    j.col(i) = adjoint(prefix) * chain.joint(i).screw().vector();
    prefix = prefix * exp_twist(chain.joint(i).screw(), q[i]);
  }
  return j;
}

ChainDesign mirror(const ChainDesign& chain, const Vec3& n) {
  const Mat3 s = Mat3::Identity() - 2.0 * n * n.transpose();
  std::vector<JointSpec> joints = chain.joints();
  for (JointSpec& j : joints) {
    // -S w keeps the rotation sense mirrored for the same joint angle.
    j.axis_direction = -(s * j.axis_direction);
    j.axis_point = s * j.axis_point;
  }
  return ChainDesign(std::move(joints), mirror_pose(chain.home(), n),
                     chain.wrist_index());
}

ChainDesign rebase(const ChainDesign& chain, const Pose& t) {
  std::vector<JointSpec> joints = chain.joints();
  for (JointSpec& j : joints) {
    j.axis_direction = t.rotation() * j.axis_direction;
    j.axis_point = t.apply(j.axis_point);
  }
  return ChainDesign(std::move(joints), t * chain.home(),
                     chain.wrist_index());
}

ChainDesign BilateralDesign::default_base_chain() {
  const double lim = 2.967;
  std::vector<JointSpec> joints(6);
  joints[0] = {Vec3::UnitZ(), Vec3::Zero(), -lim, lim};
  joints[1] = {Vec3::UnitY(), Vec3::Zero(), -lim, lim};
  joints[2] = {Vec3::UnitY(), Vec3(0, 0, 0.4), -lim, lim};
  joints[3] = {Vec3::UnitZ(), Vec3(0, 0, 0.8), -lim, lim};
  joints[4] = {Vec3::UnitY(), Vec3(0, 0, 0.8), -lim, lim};
  joints[5] = {Vec3::UnitX(), Vec3(0, 0, 0.8), -lim, lim};
  return ChainDesign(std::move(joints),
                     Pose::from_translation(Vec3(0, 0, 0.8)));
}

ChainDesign BilateralDesign::right_chain_in_base() const {
  const Vec3 mount = base_offset + 0.5 * center_distance * Vec3::UnitX();
  return rebase(arm, Pose::from_translation(mount));
}

ChainDesign BilateralDesign::left_chain_in_base() const {
  return mirror(right_chain_in_base(), Vec3::UnitX());
}

Vec3 BilateralDesign::right_wrist_point_in_base() const {
  return right_chain_in_base().joint(4).axis_point;
}

Vec3 BilateralDesign::left_wrist_point_in_base() const {
  return left_chain_in_base().joint(4).axis_point;
}

Pose base_pose(const BilateralDesign& sys, const JointVector& q_base) {
  return fk(sys.base_chain, q_base);
}

Pose left_ee_world(const BilateralDesign& sys, const JointVector& q_base,
                   const JointVector& q_left) {
  return base_pose(sys, q_base) * fk(sys.left_chain_in_base(), q_left);
}

Pose right_ee_world(const BilateralDesign& sys, const JointVector& q_base,
                    const JointVector& q_right) {
  return base_pose(sys, q_base) * fk(sys.right_chain_in_base(), q_right);
}

Eigen::MatrixXd tree_jacobian(const BilateralDesign& sys,
                              const JointVector& q_base,
                              const JointVector& q_left,
                              const JointVector& q_right) {
  const int nk = sys.base_chain.dof();
  const int na = sys.arm.dof();
  if (q_base.size() != nk || q_left.size() != na || q_right.size() != na) {
    throw DimensionMismatch("tree_jacobian: segment dimensions must be 6/7/7");
  }
  const Mat6 ad_sk = adjoint(base_pose(sys, q_base));
  const Jacobian jk = spatial_jacobian(sys.base_chain, q_base);
  const Jacobian jl = spatial_jacobian(sys.left_chain_in_base(), q_left);
  const Jacobian jr = spatial_jacobian(sys.right_chain_in_base(), q_right);

  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(12, nk + 2 * na);
  j.block(0, 0, 6, nk) = jk;
  j.block(0, nk, 6, na) = ad_sk * jl;
  j.block(6, 0, 6, nk) = jk;
  j.block(6, nk + na, 6, na) = ad_sk * jr;
  return j;
}

}  // namespace bimorph
