// bimorph - design-informed differential motion for the base + two-arm tree
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/motion_opt.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "bimorph/ik.hpp"

namespace bimorph {

Eigen::VectorXd MotionState::stacked() const {
  Eigen::VectorXd q(q_base.size() + q_left.size() + q_right.size());
  q << q_base, q_left, q_right;
  return q;
}

namespace {

struct TrackedArm {
  Vec3 point;                        // world position of the tracked point
  Eigen::Matrix<double, 3, Eigen::Dynamic> jac;  // 3 x 20
};

// Position Jacobian of a point riding a frame with spatial twist columns J:
// pdot = v + w x p  =>  Jp = J_v - [p] J_w.
Eigen::Matrix<double, 3, Eigen::Dynamic> point_jacobian(
    const Eigen::MatrixXd& j_spatial, const Vec3& p) {
  return j_spatial.bottomRows(3) - skew(p) * j_spatial.topRows(3);
}

struct TrackedPair {
  TrackedArm left;
  TrackedArm right;
};

TrackedPair tracked_points(const MotionState& state, const NullSpaceGoal& goal,
                           const BilateralDesign& sys) {
  const int n = sys.dof();
  TrackedPair out;
  out.left.jac.setZero(3, n);
  out.right.jac.setZero(3, n);

  if (goal.tracked == TrackedPoint::arm_end_effector) {
    const Eigen::MatrixXd jt =
        tree_jacobian(sys, state.q_base, state.q_left, state.q_right);
    out.left.point =
        left_ee_world(sys, state.q_base, state.q_left).translation();
    out.right.point =
        right_ee_world(sys, state.q_base, state.q_right).translation();
    out.left.jac = point_jacobian(jt.topRows(6), out.left.point);
    out.right.jac = point_jacobian(jt.bottomRows(6), out.right.point);
  } else {
    const Pose t_sk = base_pose(sys, state.q_base);
    const Jacobian jk = spatial_jacobian(sys.base_chain, state.q_base);
    out.left.point = t_sk.apply(goal.base_point_left);
    out.right.point = t_sk.apply(goal.base_point_right);
    const int nk = sys.base_chain.dof();
    out.left.jac.leftCols(nk) = point_jacobian(jk, out.left.point);
    out.right.jac.leftCols(nk) = point_jacobian(jk, out.right.point);
  }
  return out;
}

Vec3 goal_error(const ArmGoal& g, const Vec3& tracked_point) {
  return g.target.translation() - (tracked_point + g.tool_offset);
}

}  // namespace

double nullspace_potential(const MotionState& state, const NullSpaceGoal& goal,
                           const BilateralDesign& sys) {
  const TrackedPair tp = tracked_points(state, goal, sys);
  const Vec3 el = goal_error(goal.left, tp.left.point);
  const Vec3 er = goal_error(goal.right, tp.right.point);
  return el.dot(goal.left.q_weight.cwiseProduct(el)) +
         er.dot(goal.right.q_weight.cwiseProduct(er));
}

Eigen::VectorXd nullspace_gradient(const MotionState& state,
                                   const NullSpaceGoal& goal,
                                   const BilateralDesign& sys) {
  const TrackedPair tp = tracked_points(state, goal, sys);
  const Vec3 el = goal_error(goal.left, tp.left.point);
  const Vec3 er = goal_error(goal.right, tp.right.point);
  // dH/dq = -2 Jp' Q e per arm (e depends on q only through the point).
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(sys.dof());
  grad -= 2.0 * tp.left.jac.transpose() *
          goal.left.q_weight.cwiseProduct(el).eval();
  grad -= 2.0 * tp.right.jac.transpose() *
          goal.right.q_weight.cwiseProduct(er).eval();
  return grad;
}

MassScales mass_scales(const MotionState& state, const NullSpaceGoal& goal,
                       const BilateralDesign& sys, const MassSettings& mass) {
  const TrackedPair tp = tracked_points(state, goal, sys);
  const double dl = goal_error(goal.left, tp.left.point).norm();
  const double dr = goal_error(goal.right, tp.right.point).norm();

  MassScales s;
  if (mass.activate_base) {
    s.base = std::tanh(0.5 * (dl + dr) - mass.beta_base) + 1.5;
  }
  if (mass.activate_arms) {
    s.left = std::tanh(dl - mass.beta_arm) + 1.5;
    s.right = std::tanh(dr - mass.beta_arm) + 1.5;
  }
  return s;
}

Eigen::VectorXd scaled_mass_diag(const MotionState& state,
                                 const NullSpaceGoal& goal,
                                 const BilateralDesign& sys,
                                 const MassSettings& mass) {
  const MassScales s = mass_scales(state, goal, sys, mass);
  Eigen::VectorXd m(sys.dof());
  m << s.base * mass.base_diag, s.left * mass.arm_diag,
      s.right * mass.arm_diag;
  return m;
}

namespace {

// LDLT solve with two refinement passes; the projector identities below
// need residuals at the 1e-12 level even for spread spectra.
Eigen::VectorXd refined_solve(const Eigen::LDLT<Eigen::MatrixXd>& ldlt,
                              const Eigen::MatrixXd& a,
                              const Eigen::VectorXd& b) {
  Eigen::VectorXd y = ldlt.solve(b);
  for (int pass = 0; pass < 2; ++pass) {
    y += ldlt.solve(b - a * y);
  }
  return y;
}

}  // namespace

RateSolution resolve_rates(const MotionState& state, const Vec12& v_desired,
                           const NullSpaceGoal& goal,
                           const BilateralDesign& sys,
                           const MotionSettings& settings) {
  const Eigen::MatrixXd j =
      tree_jacobian(sys, state.q_base, state.q_left, state.q_right);
  const Eigen::VectorXd minv =
      scaled_mass_diag(state, goal, sys, settings.mass).cwiseInverse();
  const Eigen::MatrixXd jm = j * minv.asDiagonal();  // J M^-1
  const Eigen::MatrixXd a = jm * j.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  RateSolution out;
  out.damped = !(hi > 0.0) || lo / hi < settings.rcond_threshold;

  Eigen::MatrixXd a_eff = a;
  if (out.damped) {
    a_eff += settings.damping * Eigen::MatrixXd::Identity(12, 12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(a_eff);
    if (!(check.eigenvalues().minCoeff() >
          std::max(check.eigenvalues().maxCoeff(), 1.0) * 1e-15)) {
      throw NumericallySingular("resolve_rates: tree operator singular");
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(a_eff);

  const Eigen::VectorXd grad = nullspace_gradient(state, goal, sys);
  const Eigen::VectorXd g = minv.cwiseProduct(grad);
  const Eigen::VectorXd y_task = refined_solve(ldlt, a_eff, v_desired);
  const Eigen::VectorXd y_null = refined_solve(ldlt, a_eff, j * g);

  out.qdot = minv.cwiseProduct(j.transpose() * y_task) - g +
             minv.cwiseProduct(j.transpose() * y_null);
  return out;
}

namespace {

double smooth01(double u) {
  const double c = std::clamp(u, 0.0, 1.0);
  return c * c * (3.0 - 2.0 * c);
}

Pose interp_pose(const Pose& a, const Pose& b, double s) {
  const Mat3 rel = a.rotation().transpose() * b.rotation();
  const ScrewAngle lg = log_pose(Pose(rel, Vec3::Zero()));
  const Mat3 r = lg.xi.angular.norm() > 0.5
                     ? Mat3(a.rotation() * exp_so3(lg.xi.angular, s * lg.theta))
                     : a.rotation();
  return Pose(r, (1.0 - s) * a.translation() + s * b.translation());
}

}  // namespace

MotionTrace simulate_transition(const BilateralDesign& sys,
                                const Vec3& dexterous_wrist_point,
                                const Pose& w1, const Pose& w2,
                                double duration, double dt, bool informed,
                                const TransitionSettings& settings) {
  if (!(dt > 0.0) || !(duration > 0.0)) {
    throw Error("simulate_transition: duration and dt must be positive");
  }
  const ChainDesign left_b = sys.left_chain_in_base();
  const ChainDesign right_b = sys.right_chain_in_base();

  const auto target_at = [&](double t, bool is_left) {
    const Pose w = interp_pose(w1, w2, smooth01(t / duration));
    return w * (is_left ? settings.left_target_offset
                        : settings.right_target_offset);
  };

  MotionState state;
  state.q_base = settings.q_base0;
  const Pose t_sk0 = base_pose(sys, state.q_base);

  // Place the arms on the first targets.
  JointVector bent(7);
  bent << 0.3, 0.4, -0.2, 0.9, 0.2, 0.5, -0.3;
  state.q_left =
      solve_ik(rebase(left_b, t_sk0), target_at(0.0, true), bent,
               settings.init_ik)
          .q;
  state.q_right =
      solve_ik(rebase(right_b, t_sk0), target_at(0.0, false), bent,
               settings.init_ik)
          .q;

  NullSpaceGoal goal;
  goal.tracked = TrackedPoint::base_dexterous_point;
  const Vec3 mount =
      sys.base_offset + 0.5 * sys.center_distance * Vec3::UnitX();
  goal.base_point_right = mount + dexterous_wrist_point;
  goal.base_point_left = mirror_point(goal.base_point_right, Vec3::UnitX());
  goal.left.q_weight = informed ? settings.q_weight : Vec3::Zero();
  goal.right.q_weight = goal.left.q_weight;

  // Tool vectors chosen so the potential is zero at the initial placement:
  // the base considers its current dexterous offset ideal and preserves it.
  goal.left.target = target_at(0.0, true);
  goal.right.target = target_at(0.0, false);
  goal.left.tool_offset = goal.left.target.translation() -
                          t_sk0.apply(goal.base_point_left);
  goal.right.tool_offset = goal.right.target.translation() -
                           t_sk0.apply(goal.base_point_right);

  const JointVector arm_lo = sys.arm.lower_limits();
  const JointVector arm_hi = sys.arm.upper_limits();

  MotionTrace trace;
  trace.informed = informed;
  const int steps = std::max(1, static_cast<int>(std::llround(duration / dt)));
  trace.steps.reserve(steps + 1);

  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    goal.left.target = target_at(t, true);
    goal.right.target = target_at(t, false);

    TraceStep step;
    step.state = state;
    step.state.time = t;
    step.h_value = nullspace_potential(state, goal, sys);
    step.scale_base = mass_scales(state, goal, sys, settings.motion.mass).base;

    const PointMetrics ml = evaluate_point(spatial_jacobian(left_b, state.q_left),
                                           state.q_left, arm_lo, arm_hi);
    const PointMetrics mr = evaluate_point(
        spatial_jacobian(right_b, state.q_right), state.q_right, arm_lo, arm_hi);
    step.metrics.condition_term = 0.5 * (ml.condition_term + mr.condition_term);
    step.metrics.manipulability_term =
        0.5 * (ml.manipulability_term + mr.manipulability_term);
    step.metrics.joint_limit_term =
        0.5 * (ml.joint_limit_term + mr.joint_limit_term);

    if (k == steps) {
      trace.steps.push_back(step);  // terminal sample, no command
      break;
    }

    const Pose t_sk = base_pose(sys, state.q_base);
    const Pose left_now = t_sk * fk(left_b, state.q_left);
    const Pose right_now = t_sk * fk(right_b, state.q_right);

    Vec12 v_d;
    for (int arm = 0; arm < 2; ++arm) {
      const bool is_left = arm == 0;
      const Pose tgt = target_at(t, is_left);
      const Pose tgt_next = target_at(t + dt, is_left);
      const ScrewAngle delta = log_pose(tgt_next * tgt.inverse());
      const Vec6 v_ff = delta.xi.vector() * (delta.theta / dt);
      const Vec6 v_err =
          error_twist(is_left ? left_now : right_now, tgt);
      v_d.segment<6>(arm * 6) = v_ff + settings.kp * v_err;
    }
    step.v_desired = v_d;

    const RateSolution rs =
        resolve_rates(state, v_d, goal, sys, settings.motion);
    step.v_achieved =
        tree_jacobian(sys, state.q_base, state.q_left, state.q_right) *
        rs.qdot;
    trace.steps.push_back(step);

    state.q_base += rs.qdot.segment(0, 6) * dt;
    state.q_left += rs.qdot.segment(6, 7) * dt;
    state.q_right += rs.qdot.segment(13, 7) * dt;
    state.q_base = sys.base_chain.clamp(state.q_base);
    state.q_left = left_b.clamp(state.q_left);
    state.q_right = right_b.clamp(state.q_right);
    state.time = t + dt;
  }
  return trace;
}

namespace {
std::vector<PointMetrics> trace_metrics(const MotionTrace& trace) {
  std::vector<PointMetrics> pts;
  pts.reserve(trace.steps.size());
  for (const TraceStep& s : trace.steps) pts.push_back(s.metrics);
  return pts;
}
}  // namespace

DexterityReport evaluate_trace(const MotionTrace& trace) {
  return evaluate_points(trace_metrics(trace));
}

std::pair<DexterityReport, DexterityReport> compare_traces(
    const MotionTrace& a, const MotionTrace& b) {
  return evaluate_points_jointly(trace_metrics(a), trace_metrics(b));
}

}  // namespace bimorph
