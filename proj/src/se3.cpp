// bimorph - rigid body math: rotations, poses, twists, exp/log, adjoints
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/se3.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace bimorph {

namespace {
constexpr double kTinyAngle = 1e-8;    // Taylor / prismatic fallback
constexpr double kNearPiGuard = 1e-6;  // log_pose refuses beyond this
constexpr double kNearPiRobust = 1e-4; // symmetric-part axis extraction
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0.0, -v.z(),  v.y(),
         v.z(),    0.0, -v.x(),
        -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Vec3 unskew(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() > 0 ? 1.0 : -1.0;
  return u * d * v.transpose();
}

bool is_rotation(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

double rotation_angle(const Mat3& r) {
  double c = (r.trace() - 1.0) * 0.5;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Mat3 exp_so3(const Vec3& unit_axis, double angle) {
  const Mat3 w = skew(unit_axis);
  return Mat3::Identity() + std::sin(angle) * w +
         (1.0 - std::cos(angle)) * w * w;
}

bool Twist::is_unit_screw(double tol) const {
  const double wn = angular.norm();
  if (std::abs(wn - 1.0) <= tol) return true;
  return wn <= tol && std::abs(linear.norm() - 1.0) <= tol;
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out(rot_ * rhs.rot_, rot_ * rhs.trans_ + trans_);
  out.compositions_ = std::max(compositions_, rhs.compositions_) + 1;
  if (out.compositions_ > kRenormalizeAfter) {
    out.rot_ = orthonormalize(out.rot_);
    out.compositions_ = 0;
  }
  return out;
}

Pose Pose::inverse() const {
  Pose out(rot_.transpose(), -(rot_.transpose() * trans_));
  out.compositions_ = compositions_;
  return out;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = rot_;
  m.block<3, 1>(0, 3) = trans_;
  return m;
}

bool Pose::is_approx(const Pose& other, double tol) const {
  return distance(other) <= tol;
}

double Pose::distance(const Pose& other) const {
  double d = (rot_ - other.rot_).cwiseAbs().maxCoeff();
  return std::max(d, (trans_ - other.trans_).cwiseAbs().maxCoeff());
}

Pose exp_twist(const Twist& xi, double theta) {
  const double wn = xi.angular.norm();
  if (wn < kTinyAngle) {
    // Prismatic limit: pure translation along v.
    return Pose(Mat3::Identity(), xi.linear * theta);
  }
  const Vec3 w = xi.angular / wn;
  const double th = theta * wn;  // tolerate non-unit angular inputs
  const Mat3 wx = skew(w);
  const Mat3 wx2 = wx * wx;
  const Mat3 r = Mat3::Identity() + std::sin(th) * wx +
                 (1.0 - std::cos(th)) * wx2;
  // G(th) v with G = I th + (1-cos th)[w] + (th - sin th)[w]^2
  const Mat3 g = Mat3::Identity() * th + (1.0 - std::cos(th)) * wx +
                 (th - std::sin(th)) * wx2;
  return Pose(r, g * (xi.linear / wn));
}

ScrewAngle log_pose(const Pose& t) {
  const Mat3& r = t.rotation();
  const Vec3& p = t.translation();
  const double theta = rotation_angle(r);

  if (theta < kTinyAngle) {
    // Rotation is negligible; report the prismatic form.
    const double pn = p.norm();
    if (pn < 1e-300) return {Twist{}, 0.0};
    return {Twist{Vec3::Zero(), p / pn}, pn};
  }
  if (theta > M_PI - kNearPiGuard) {
    throw AngleNearPi("log_pose: rotation angle within 1e-6 of pi");
  }

  Vec3 w;
  if (theta > M_PI - kNearPiRobust) {
    // sin(theta) is too small for the antisymmetric part alone; recover the
    // axis from the symmetric part, sign from the antisymmetric part.
    const Mat3 b =
        ((r + r.transpose()) * 0.5 - std::cos(theta) * Mat3::Identity()) /
        (1.0 - std::cos(theta));
    int k = 0;
    b.diagonal().maxCoeff(&k);
    w = b.col(k) / std::sqrt(b(k, k));
    if (w.dot(unskew(r - r.transpose())) < 0.0) w = -w;
  } else {
    w = unskew(r - r.transpose()) / (2.0 * std::sin(theta));
  }

  // v = G(theta)^-1 p with
  // G^-1 = I/theta - [w]/2 + (1/theta - cot(theta/2)/2) [w]^2
  const Mat3 wx = skew(w);
  const double cot_half = 1.0 / std::tan(theta * 0.5);
  const Mat3 ginv = Mat3::Identity() / theta - 0.5 * wx +
                    (1.0 / theta - 0.5 * cot_half) * wx * wx;
  return {Twist{w, ginv * p}, theta};
}

Mat6 adjoint(const Pose& t) {
  Mat6 ad = Mat6::Zero();
  ad.block<3, 3>(0, 0) = t.rotation();
  ad.block<3, 3>(3, 0) = skew(t.translation()) * t.rotation();
  ad.block<3, 3>(3, 3) = t.rotation();
  return ad;
}

Vec6 error_twist(const Pose& current, const Pose& target) {
  const ScrewAngle body = log_pose(current.inverse() * target);
  return adjoint(current) * (body.xi.vector() * body.theta);
}

Vec3 mirror_point(const Vec3& p, const Vec3& n) {
  return p - 2.0 * n.dot(p) * n;
}

Pose mirror_pose(const Pose& t, const Vec3& n) {
  const Mat3 s = Mat3::Identity() - 2.0 * n * n.transpose();
  return Pose(s * t.rotation() * s, s * t.translation());
}

}  // namespace bimorph
