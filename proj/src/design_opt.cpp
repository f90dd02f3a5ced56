// bimorph - simulated-annealing morphology optimization of the 7-DOF arm
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/design_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bimorph {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Vector2d angles_of(const Vec3& unit_dir) {
  const double polar = std::acos(std::clamp(unit_dir.z(), -1.0, 1.0));
  const double az = std::atan2(unit_dir.y(), unit_dir.x());
  return {az, polar};
}
}  // namespace

Vec3 DesignVector::axis_direction(int joint) const {
  const double az = axis_angles[joint][0];
  const double polar = axis_angles[joint][1];
  const double sp = std::sin(polar);
  return Vec3(std::cos(az) * sp, std::sin(az) * sp, std::cos(polar));
}

Eigen::VectorXd DesignVector::to_vector() const {
  Eigen::VectorXd v(kScalarCount);
  int k = 0;
  for (int i = 0; i < 7; ++i) {
    v[k++] = axis_angles[i][0];
    v[k++] = axis_angles[i][1];
  }
  for (int i = 0; i < 5; ++i) {
    v.segment<3>(k) = axis_points[i];
    k += 3;
  }
  v.segment<3>(k) = base_offset;
  return v;
}

DesignVector DesignVector::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kScalarCount) {
    throw DimensionMismatch("DesignVector::from_vector: need 32 scalars");
  }
  DesignVector d;
  int k = 0;
  for (int i = 0; i < 7; ++i) {
    d.axis_angles[i][0] = v[k++];
    d.axis_angles[i][1] = v[k++];
  }
  for (int i = 0; i < 5; ++i) {
    d.axis_points[i] = v.segment<3>(k);
    k += 3;
  }
  d.base_offset = v.segment<3>(k);
  return d;
}

bool DesignVector::satisfies_constraints() const {
  for (int a = 4; a < 7; ++a) {
    for (int b = a + 1; b < 7; ++b) {
      if (std::abs(axis_direction(a).dot(axis_direction(b))) > 0.999) {
        return false;
      }
    }
  }
  for (const Vec3& c : axis_points) {
    if (c.cwiseAbs().maxCoeff() > 1.0) return false;
  }
  for (int i = 1; i < 5; ++i) {
    if (axis_points[i].norm() < axis_points[i - 1].norm() - 1e-12) {
      return false;
    }
  }
  return true;
}

ChainDesign DesignVector::to_chain(double joint_limit,
                                   const Vec3& tool_offset) const {
  std::vector<JointSpec> joints(7);
  for (int i = 0; i < 7; ++i) {
    joints[i] = {axis_direction(i), axis_point(i), -joint_limit, joint_limit};
  }
  return ChainDesign(std::move(joints),
                     Pose::from_translation(wrist_point() + tool_offset), 4);
}

DesignVector DesignVector::anthropomorphic() {
  DesignVector d;
  d.axis_angles[0] = angles_of(Vec3::UnitZ());
  d.axis_angles[1] = angles_of(Vec3::UnitY());
  d.axis_angles[2] = angles_of(Vec3::UnitZ());
  d.axis_angles[3] = angles_of(Vec3::UnitY());
  d.axis_angles[4] = angles_of(Vec3::UnitZ());
  d.axis_angles[5] = angles_of(Vec3::UnitY());
  d.axis_angles[6] = angles_of(Vec3::UnitX());
  d.axis_points[0] = Vec3::Zero();
  d.axis_points[1] = Vec3::Zero();
  d.axis_points[2] = Vec3::Zero();
  d.axis_points[3] = Vec3(0.0, 0.0, 0.30);  // elbow
  d.axis_points[4] = Vec3(0.0, 0.0, 0.55);  // wrist
  d.base_offset = Vec3::Zero();
  return d;
}

DesignVector random_design(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    DesignVector d;
    for (int i = 0; i < 7; ++i) {
      const double az = (2.0 * u01(rng) - 1.0) * M_PI;
      const double polar = std::acos(2.0 * u01(rng) - 1.0);
      d.axis_angles[i] = {az, polar};
    }
    std::array<Vec3, 5> pts;
    for (Vec3& p : pts) {
      p = Vec3(1.4 * u01(rng) - 0.7, 1.4 * u01(rng) - 0.7,
               1.4 * u01(rng) - 0.7);
    }
    std::sort(pts.begin(), pts.end(),
              [](const Vec3& a, const Vec3& b) { return a.norm() < b.norm(); });
    d.axis_points = pts;
    d.base_offset = Vec3::Zero();
    if (d.satisfies_constraints()) return d;
  }
  throw ConstraintUnsatisfiable("random_design: no feasible sample found");
}

double design_cost(const DesignVector& design, const PoseCloud& cloud,
                   const IkSettings& ik_settings, const Vec6& w1_diag,
                   double w2) {
  if (cloud.size() == 0) throw Error("design_cost: empty cloud");
  const ChainDesign chain = design.to_chain();
  const Pose anchor = Pose::from_translation(design.wrist_point());

  double cost = 0.0;
  JointVector q_prev = JointVector::Zero(7);
  bool have_prev = false;
  try {
    for (const Pose& sample : cloud.samples) {
      const IkResult res =
          solve_ik(chain, anchor * sample, q_prev, ik_settings);
      cost += res.residual_twist.dot(w1_diag.cwiseProduct(res.residual_twist));
      if (have_prev) cost += w2 * (res.q - q_prev).squaredNorm();
      q_prev = res.q;
      have_prev = true;
    }
  } catch (const NumericallySingular&) {
    return kInf;  // degenerate candidate
  }
  return cost;
}

DesignVector perturb(const DesignVector& design, double temperature,
                     double initial_temp, const PerturbScales& scales,
                     std::mt19937_64& rng, bool perturb_base_offset) {
  const double ratio = initial_temp > 0.0 ? temperature / initial_temp : 0.0;
  if (ratio <= 0.0) return design;
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int attempt = 0; attempt < 100; ++attempt) {
    DesignVector cand = design;
    for (int i = 0; i < 7; ++i) {
      cand.axis_angles[i][0] += scales.axis_angle * ratio * gauss(rng);
      cand.axis_angles[i][1] += scales.axis_angle * ratio * gauss(rng);
    }
    for (Vec3& p : cand.axis_points) {
      for (int a = 0; a < 3; ++a) {
        p[a] += scales.axis_point * ratio * gauss(rng);
      }
    }
    if (perturb_base_offset) {
      for (int a = 0; a < 3; ++a) {
        cand.base_offset[a] += scales.base_offset * ratio * gauss(rng);
      }
    }
    if (cand.satisfies_constraints()) return cand;
  }
  throw ConstraintUnsatisfiable("perturb: 100 redraws all infeasible");
}

std::pair<DesignVector, AnnealTrace> anneal(const DesignVector& initial,
                                            const PoseCloud& cloud,
                                            const AnnealSettings& settings) {
  std::mt19937_64 rng(settings.rng_seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  DesignVector current = initial;
  double current_cost =
      design_cost(current, cloud, settings.ik, settings.w1_diag, settings.w2);
  DesignVector best = current;
  double best_cost = current_cost;

  AnnealTrace trace;
  trace.rows.reserve(settings.max_iters);
  int stall = 0;

  for (int i = 0; i < settings.max_iters; ++i) {
    const double temp = settings.initial_temp * std::pow(settings.decay_rate, i);
    double cand_cost = kInf;
    double delta = kInf;
    bool accepted = false;
    try {
      const DesignVector cand =
          perturb(current, temp, settings.initial_temp, settings.scales, rng,
                  settings.optimize_base_offset);
      cand_cost =
          design_cost(cand, cloud, settings.ik, settings.w1_diag, settings.w2);
      delta = cand_cost - current_cost;
      accepted = delta < 0.0 ||
                 (temp > 0.0 && u01(rng) < std::exp(-delta / temp));
      if (accepted) {
        current = cand;
        current_cost = cand_cost;
      }
      if (cand_cost < best_cost - settings.stall_tolerance) {
        stall = 0;
      } else {
        ++stall;
      }
      if (cand_cost < best_cost) {
        best = cand;
        best_cost = cand_cost;
      }
    } catch (const ConstraintUnsatisfiable&) {
      ++stall;
    }
    trace.rows.push_back({i, cand_cost, accepted, temp, best_cost, delta});
    if (stall >= settings.stall_iters) break;
  }
  return {best, trace};
}

}  // namespace bimorph
