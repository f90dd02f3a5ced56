// bimorph - kinematic dexterity metrics and normalized reporting
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/dexterity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace bimorph {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct TermRanges {
  double cond_lo, cond_hi, manip_lo, manip_hi, limit_lo, limit_hi;
};

TermRanges ranges_of(const std::vector<PointMetrics>& pts) {
  TermRanges r{kInf, -kInf, kInf, -kInf, kInf, -kInf};
  for (const PointMetrics& p : pts) {
    if (std::isfinite(p.condition_term)) {
      r.cond_lo = std::min(r.cond_lo, p.condition_term);
      r.cond_hi = std::max(r.cond_hi, p.condition_term);
    }
    r.manip_lo = std::min(r.manip_lo, -p.manipulability_term);
    r.manip_hi = std::max(r.manip_hi, -p.manipulability_term);
    r.limit_lo = std::min(r.limit_lo, p.joint_limit_term);
    r.limit_hi = std::max(r.limit_hi, p.joint_limit_term);
  }
  return r;
}

double norm_against(double x, double lo, double hi) {
  if (!std::isfinite(x)) return 1.0;
  return hi - lo > 0.0 ? (x - lo) / (hi - lo) : 0.0;
}

DexterityReport report_with_ranges(const std::vector<PointMetrics>& pts,
                                   const TermRanges& r) {
  DexterityReport rep;
  rep.points = pts;
  rep.composite.reserve(pts.size());
  for (const PointMetrics& p : pts) {
    const double c = norm_against(p.condition_term, r.cond_lo, r.cond_hi);
    const double m = norm_against(-p.manipulability_term, r.manip_lo, r.manip_hi);
    const double l = norm_against(p.joint_limit_term, r.limit_lo, r.limit_hi);
    rep.composite.push_back((c + m + l) / 3.0);
  }
  if (!rep.composite.empty()) {
    double sum = 0.0, sq = 0.0;
    rep.min = kInf;
    rep.max = -kInf;
    for (double v : rep.composite) {
      sum += v;
      rep.min = std::min(rep.min, v);
      rep.max = std::max(rep.max, v);
    }
    rep.mean = sum / rep.composite.size();
    for (double v : rep.composite) sq += (v - rep.mean) * (v - rep.mean);
    rep.std_dev = std::sqrt(sq / rep.composite.size());
  }
  return rep;
}

}  // namespace

PointMetrics evaluate_point(const Jacobian& j, const JointVector& q,
                            const JointVector& lower,
                            const JointVector& upper) {
  if (j.cols() < 6) {
    throw DimensionMismatch("evaluate_point: need n >= 6 columns");
  }
  if (q.size() != j.cols() || lower.size() != q.size() ||
      upper.size() != q.size()) {
    throw DimensionMismatch("evaluate_point: joint/limit size mismatch");
  }
  const Mat6 jjt = j * j.transpose();
  Eigen::SelfAdjointEigenSolver<Mat6> eig(jjt);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();

  PointMetrics m;
  m.condition_term = lmin < 1e-12 ? kInf : lmax / lmin - 1.0;
  m.manipulability_term = std::max(0.0, eig.eigenvalues().prod());
  m.joint_limit_term = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const double range = upper[i] - lower[i];
    m.joint_limit_term += ((q[i] - upper[i]) * (q[i] - upper[i]) +
                           (q[i] - lower[i]) * (q[i] - lower[i])) /
                          (range * range);
  }
  return m;
}

DexterityReport evaluate_points(const std::vector<PointMetrics>& points) {
  return report_with_ranges(points, ranges_of(points));
}

std::pair<DexterityReport, DexterityReport> evaluate_points_jointly(
    const std::vector<PointMetrics>& a, const std::vector<PointMetrics>& b) {
  auto reports = evaluate_points_pooled({a, b});
  return {std::move(reports[0]), std::move(reports[1])};
}

std::vector<DexterityReport> evaluate_points_pooled(
    const std::vector<std::vector<PointMetrics>>& sets) {
  std::vector<PointMetrics> pooled;
  for (const auto& s : sets) pooled.insert(pooled.end(), s.begin(), s.end());
  const TermRanges r = ranges_of(pooled);
  std::vector<DexterityReport> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.push_back(report_with_ranges(s, r));
  return out;
}

std::vector<PointMetrics> cloud_point_metrics(const ChainDesign& chain,
                                              const Vec3& anchor_point,
                                              const PoseCloud& cloud,
                                              const IkSettings& ik_settings) {
  const Pose anchor = Pose::from_translation(anchor_point);
  std::vector<PointMetrics> out;
  out.reserve(cloud.samples.size());
  const JointVector lower = chain.lower_limits();
  const JointVector upper = chain.upper_limits();
  JointVector q_prev = JointVector::Zero(chain.dof());
  for (const Pose& sample : cloud.samples) {
    const IkResult res = solve_ik(chain, anchor * sample, q_prev, ik_settings);
    out.push_back(
        evaluate_point(spatial_jacobian(chain, res.q), res.q, lower, upper));
    q_prev = res.q;
  }
  return out;
}

DexterityReport evaluate_cloud(const ChainDesign& chain,
                               const Vec3& anchor_point,
                               const PoseCloud& cloud,
                               const IkSettings& ik_settings) {
  return evaluate_points(
      cloud_point_metrics(chain, anchor_point, cloud, ik_settings));
}

}  // namespace bimorph
