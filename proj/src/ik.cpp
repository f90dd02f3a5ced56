// bimorph - robust first-order differential inverse kinematics
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/ik.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace bimorph {

namespace {

// Near-pi error rotations get nudged by a tiny fixed rotation so the
// logarithm is defined again; deterministic, no RNG.
Vec6 error_twist_robust(const Pose& current, const Pose& target) {
  try {
    return error_twist(current, target);
  } catch (const AngleNearPi&) {
  }
  for (int axis = 0; axis < 3; ++axis) {
    try {
      const Pose nudged =
          target * Pose::from_rotation(exp_so3(Vec3::Unit(axis), 1e-3));
      return error_twist(current, nudged);
    } catch (const AngleNearPi&) {
    }
  }
  throw AngleNearPi("error twist undefined even after perturbation");
}

}  // namespace

double wrap_angle(double a) {
  double w = std::fmod(a + M_PI, 2.0 * M_PI);
  if (w <= 0.0) w += 2.0 * M_PI;
  return w - M_PI;
}

double rcond_jjt(const Jacobian& j) {
  const Mat6 jjt = j * j.transpose();
  Eigen::SelfAdjointEigenSolver<Mat6> eig(jjt);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (hi <= 0.0) return 0.0;
  return std::max(lo, 0.0) / hi;
}

Eigen::MatrixXd damped_pinv(const Jacobian& j, const JointVector& w_diag,
                            double lambda, double rcond_threshold) {
  const int n = static_cast<int>(j.cols());
  JointVector winv(n);
  if (w_diag.size() == 0) {
    winv.setOnes();
  } else {
    if (w_diag.size() != n) {
      throw DimensionMismatch("damped_pinv: weight diagonal size mismatch");
    }
    if (w_diag.minCoeff() <= 0.0) {
      throw Error("damped_pinv: weight diagonal must be positive");
    }
    winv = w_diag.cwiseInverse();
  }

  const double lambda_eff = rcond_jjt(j) < rcond_threshold ? lambda : 0.0;
  const Mat6 a = j * winv.asDiagonal() * j.transpose() +
                 lambda_eff * Mat6::Identity();

  Eigen::SelfAdjointEigenSolver<Mat6> eig(a);
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  if (!(hi > 0.0) || lo <= hi * 1e-14) {
    throw NumericallySingular("damped_pinv: normal matrix not invertible");
  }
  const Mat6 a_inv = eig.eigenvectors() *
                     eig.eigenvalues().cwiseInverse().asDiagonal() *
                     eig.eigenvectors().transpose();
  return winv.asDiagonal() * j.transpose() * a_inv;
}

IkResult solve_ik(const ChainDesign& chain, const Pose& target,
                  const JointVector& seed, const IkSettings& settings) {
  if (seed.size() != chain.dof()) {
    throw DimensionMismatch("solve_ik: seed size != chain dof");
  }
  IkResult res;
  res.q = seed;

  for (int it = 0;; ++it) {
    const Pose t_sb = fk(chain, res.q);
    const Vec6 v =
        settings.error_weight.cwiseProduct(error_twist_robust(t_sb, target));
    res.residual_twist = v;
    res.residual_twist_norm = v.norm();
    res.iterations = it;
    if (res.residual_twist_norm <= settings.tolerance) {
      res.converged = true;
      break;
    }
    if (it >= settings.max_iters) break;

    const Jacobian j = spatial_jacobian(chain, res.q);
    const Eigen::MatrixXd pinv = damped_pinv(
        j, settings.weight, settings.damping, settings.rcond_threshold);
    res.q += settings.step_size * (pinv * v);

    bool clamped = false;
    for (int i = 0; i < res.q.size(); ++i) {
      res.q[i] = wrap_angle(res.q[i]);
      const double c =
          std::clamp(res.q[i], chain.joint(i).lower, chain.joint(i).upper);
      clamped = clamped || c != res.q[i];
      res.q[i] = c;
    }
    if (clamped) ++res.limit_clamps;
  }
  return res;
}

}  // namespace bimorph
