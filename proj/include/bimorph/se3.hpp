// bimorph - rigid body math: rotations, poses, twists, exp/log, adjoints
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "bimorph/errors.hpp"

namespace bimorph {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Skew-symmetric matrix such that skew(a) * b = a x b.
Mat3 skew(const Vec3& v);

/// Inverse of skew(); expects (a numerically) skew-symmetric input.
Vec3 unskew(const Mat3& m);

/// Project a near-rotation matrix back onto SO(3) (polar factor via SVD).
Mat3 orthonormalize(const Mat3& r);

/// R'R = I and det R = +1, both within tol.
bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Rotation angle in [0, pi] of a rotation matrix.
double rotation_angle(const Mat3& r);

/// Rodrigues' formula for a unit axis.
Mat3 exp_so3(const Vec3& unit_axis, double angle);

// A screw axis in the spatial frame. Components are kept angular-first:
// vector form is [angular; linear]. A unit revolute screw has |angular| = 1,
// a unit prismatic screw has angular = 0 and |linear| = 1.
struct Twist {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  Vec6 vector() const {
    Vec6 v;
    v << angular, linear;
    return v;
  }
  static Twist from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }

  bool is_unit_screw(double tol = 1e-9) const;
};

// Rigid transform as an explicit rotation + translation pair. Values are
// immutable once built; all operations return new poses. Products track how
// many compositions a pose has been through and re-orthonormalize the
// rotation block after long chains so drift cannot accumulate.
class Pose {
 public:
  Pose() : rot_(Mat3::Identity()), trans_(Vec3::Zero()) {}
  Pose(const Mat3& rotation, const Vec3& translation)
      : rot_(rotation), trans_(translation) {}

  static Pose identity() { return Pose(); }
  static Pose from_rotation(const Mat3& r) { return Pose(r, Vec3::Zero()); }
  static Pose from_translation(const Vec3& p) {
    return Pose(Mat3::Identity(), p);
  }

  const Mat3& rotation() const { return rot_; }
  const Vec3& translation() const { return trans_; }

  Pose operator*(const Pose& rhs) const;
  Pose inverse() const;

  /// Transform a point.
  Vec3 apply(const Vec3& p) const { return rot_ * p + trans_; }

  Mat4 matrix() const;

  bool is_approx(const Pose& other, double tol = 1e-12) const;

  /// Max abs entry difference of the homogeneous matrices.
  double distance(const Pose& other) const;

 private:
  Mat3 rot_;
  Vec3 trans_;
  int compositions_ = 0;

  static constexpr int kRenormalizeAfter = 100;
};

/// e^{xi * theta} for a unit screw xi (Rodrigues rotation block plus the
/// closed-form translation block). Total function: any xi/theta accepted.
Pose exp_twist(const Twist& xi, double theta);

struct ScrewAngle {
  Twist xi;      // unit screw (or zero twist for the identity)
  double theta;  // in [0, pi)
};

/// Matrix logarithm as a unit screw and angle, theta in [0, pi).
/// Rotations within 1e-6 of pi throw AngleNearPi; the caller picks a
/// perturbation policy. Rotation angles below 1e-8 fall back to the
/// prismatic form so no 0/0 appears for the tiny updates IK produces.
ScrewAngle log_pose(const Pose& t);

/// 6x6 adjoint [R 0; [p]R R]; maps body twists to spatial twists and
/// satisfies Ad(T1 T2) = Ad(T1) Ad(T2).
Mat6 adjoint(const Pose& t);

/// Spatial error twist Ad_{T_cur} log(T_cur^-1 * T_target), as a 6-vector.
/// Zero iff current == target. Propagates AngleNearPi.
Vec6 error_twist(const Pose& current, const Pose& target);

/// Reflect a point across the plane through the origin with unit normal n.
Vec3 mirror_point(const Vec3& p, const Vec3& plane_normal);

/// Conjugate a pose by the reflection across the plane with unit normal n.
/// The result is again a proper rigid transform.
Pose mirror_pose(const Pose& t, const Vec3& plane_normal);

}  // namespace bimorph
