// bimorph - robust first-order differential inverse kinematics
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include "bimorph/chain.hpp"

namespace bimorph {

struct IkSettings {
  double step_size = 0.5;        // alpha in (0, 1]
  double tolerance = 1e-6;       // twist-norm convergence test
  int max_iters = 500;
  double damping = 1e-3;         // lambda, applied only near singularities
  double rcond_threshold = 1e-3; // rcond(J J') below this engages damping
  JointVector weight;            // diagonal of W, empty means identity
  Vec6 error_weight = Vec6::Ones();  // componentwise scaling of the error
                                     // twist, for small-scale tasks
};

struct IkResult {
  JointVector q;
  Vec6 residual_twist = Vec6::Zero();  // weighted error twist at exit
  double residual_twist_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  int limit_clamps = 0;  // steps where at least one joint hit a limit
};

/// Reciprocal condition number of J J' (smallest over largest eigenvalue).
double rcond_jjt(const Jacobian& j);

/// Weighted damped least-squares pseudoinverse
///   W^-1 J' (J W^-1 J' + lambda' I6)^-1
/// with lambda' = lambda when rcond(J J') < rcond_threshold and 0 otherwise.
/// `w_diag` is the diagonal of W (empty = identity). Throws
/// NumericallySingular when the damped normal matrix is still not invertible.
Eigen::MatrixXd damped_pinv(const Jacobian& j, const JointVector& w_diag,
                            double lambda, double rcond_threshold);

/// First-order differential IK: iterate q <- q + alpha J^dag V with
/// V = Ad_{T_sb} log(T_sb^-1 T), wrapping joints to (-pi, pi] and clamping
/// to limits after each step. Non-convergence is a normal result, not an
/// error; the best-effort q and residual are always returned. Deterministic:
/// identical inputs give bit-identical outputs.
IkResult solve_ik(const ChainDesign& chain, const Pose& target,
                  const JointVector& seed, const IkSettings& settings);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace bimorph
