// bimorph - kinematic dexterity metrics and normalized reporting
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "bimorph/chain.hpp"
#include "bimorph/data_pipeline.hpp"
#include "bimorph/ik.hpp"

namespace bimorph {

// Per-configuration metric terms. The condition term (isotropy defect) and
// the joint-limit term are better when small, manipulability when large;
// they are reported separately and only composited after normalization.
struct PointMetrics {
  double condition_term = 0.0;       // lmax/lmin(JJ') - 1; +inf when singular
  double manipulability_term = 0.0;  // det(JJ')
  double joint_limit_term = 0.0;     // sum ((q-up)^2 + (q-lo)^2)/(up-lo)^2

  /// The raw metric as a single sum, kept for fidelity with the source
  /// formulation despite its mixed sign conventions.
  double raw_sum() const {
    return condition_term + manipulability_term + joint_limit_term;
  }
};

/// Terms from a 6xn Jacobian (n >= 6) and the joint state. Eigenvalues of
/// J J' come from a symmetric eigensolve; lmin below 1e-12 reports the
/// condition term as +inf rather than exploding.
PointMetrics evaluate_point(const Jacobian& j, const JointVector& q,
                            const JointVector& lower,
                            const JointVector& upper);

struct DexterityReport {
  std::vector<PointMetrics> points;
  std::vector<double> composite;  // min-max normalized per term, lower=better
  double mean = 0.0;
  double std_dev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Min-max normalize each term across the set (manipulability negated so
/// lower is uniformly better), composite as the mean of the three
/// normalized terms, aggregate. Infinite condition terms normalize to 1.
DexterityReport evaluate_points(const std::vector<PointMetrics>& points);

/// Normalize two point sets against their pooled min/max so the composites
/// of different designs evaluated on the same data are comparable.
std::pair<DexterityReport, DexterityReport> evaluate_points_jointly(
    const std::vector<PointMetrics>& a, const std::vector<PointMetrics>& b);

/// N-way version of the pooled normalization.
std::vector<DexterityReport> evaluate_points_pooled(
    const std::vector<std::vector<PointMetrics>>& sets);

/// Metric terms of a design swept over an anchored pose cloud: each sample
/// is targeted with warm-started IK from the previous solution and the
/// Jacobian is evaluated at the solved configuration.
std::vector<PointMetrics> cloud_point_metrics(const ChainDesign& chain,
                                              const Vec3& anchor_point,
                                              const PoseCloud& cloud,
                                              const IkSettings& ik_settings);

DexterityReport evaluate_cloud(const ChainDesign& chain,
                               const Vec3& anchor_point,
                               const PoseCloud& cloud,
                               const IkSettings& ik_settings);

}  // namespace bimorph
