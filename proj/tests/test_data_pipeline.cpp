// bimorph tests - trajectory synthesis and cloud preprocessing
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "bimorph/data_pipeline.hpp"
#include "oracles.hpp"

using namespace bimorph;

namespace {

// Geodesic length of the orientation path.
double orientation_sweep(const RawTrajectory& traj) {
  double total = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    total += rotation_angle(traj.samples[i - 1].left.rotation().transpose() *
                            traj.samples[i].left.rotation());
  }
  return total;
}

// Max translation coordinate range over both arms, each around its own mean.
double translation_extent(const RawTrajectory& traj) {
  double extent = 0.0;
  for (int arm = 0; arm < 2; ++arm) {
    Vec3 lo = Vec3::Constant(1e30), hi = Vec3::Constant(-1e30);
    for (const TrajectorySample& s : traj.samples) {
      const Vec3& p = (arm == 0 ? s.left : s.right).translation();
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    extent = std::max(extent, (hi - lo).maxCoeff());
  }
  return extent;
}

}  // namespace

TEST_CASE("extract: constant trajectory collapses to identity samples") {
  RawTrajectory traj;
  traj.label = TaskLabel::cutting;
  const Pose fixed(exp_so3(Vec3(1, 1, 0).normalized(), 0.4), Vec3(0.2, 0, 1));
  for (int i = 0; i < 100; ++i) {
    traj.samples.push_back({i * 0.02, fixed, mirror_pose(fixed, Vec3::UnitX())});
  }
  const PoseCloud cloud = extract_local_variation(traj, 0.5);
  for (const Pose& p : cloud.samples) {
    CHECK(p.is_approx(Pose::identity(), 1e-12));
  }
  CHECK(cloud.mean_translation().norm() < 1e-12);
}

TEST_CASE("extract: recovers a wiggle riding on a slow drift") {
  // Wiggle on the y axis (unchanged by the left/right mirror), one full
  // period per window, plus a slow drift on z.
  const double period = 2.0, dt = 0.02, amp = 0.005, drift_rate = 1e-4;
  RawTrajectory traj;
  traj.label = TaskLabel::path_tracking;
  const int n = 400;  // 8 s, 4 windows
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    const Vec3 p(0.0, amp * std::sin(2 * M_PI * t / period),
                 drift_rate * t);
    traj.samples.push_back(
        {t, Pose::from_translation(p), Pose::from_translation(p)});
  }
  const PoseCloud cloud = extract_local_variation(traj, period);
  REQUIRE(cloud.size() == 2 * n);
  // Both arm streams of each window see the same y wiggle.
  for (int w = 0; w < 4; ++w) {
    for (int arm = 0; arm < 2; ++arm) {
      for (int k = 0; k < 100; ++k) {
        const double t = (w * 100 + k) * dt;
        const double expected = amp * std::sin(2 * M_PI * t / period);
        const Vec3 got =
            cloud.samples[w * 200 + arm * 100 + k].translation();
        CHECK(std::abs(got.y() - expected) < 1e-3);
        CHECK(std::abs(got.z()) < 1e-3);  // drift removed
      }
    }
  }
}

TEST_CASE("extract: single window equals whole-trajectory centering") {
  std::mt19937_64 rng(301);
  RawTrajectory traj;
  traj.label = TaskLabel::suturing;
  for (int i = 0; i < 60; ++i) {
    traj.samples.push_back({i * 0.1, oracles::random_pose(rng, 0.01),
                            oracles::random_pose(rng, 0.01)});
  }
  const PoseCloud one = extract_local_variation(traj, 1000.0);
  CHECK(one.size() == 120);
  CHECK(one.mean_translation().norm() < 1e-9);
}

TEST_CASE("extract: window below the sampling interval throws") {
  RawTrajectory traj;
  traj.label = TaskLabel::pick_place;
  traj.samples.push_back({0.0, Pose(), Pose()});
  traj.samples.push_back({0.5, Pose(), Pose()});
  CHECK_THROWS_AS(extract_local_variation(traj, 0.1), EmptyWindow);
}

TEST_CASE("extract: output translation mean is zero") {
  const RawTrajectory traj =
      synthesize_task(TaskLabel::suturing, GeneratorSettings{50.0, 6.0}, 9);
  const PoseCloud cloud = extract_local_variation(traj, 2.0);
  CHECK(cloud.mean_translation().norm() <= 1e-9);
  cloud.validate();
}

TEST_CASE("cluster_resample: uniform cloud stays uniform") {
  PoseCloud cloud;
  // 8 voxels at 5 mm, 10 samples each.
  for (int v = 0; v < 8; ++v) {
    const Vec3 base((v & 1) * 0.005, ((v >> 1) & 1) * 0.005,
                    ((v >> 2) & 1) * 0.005);
    for (int k = 0; k < 10; ++k) {
      cloud.samples.push_back(
          Pose::from_translation(base + Vec3(1e-4 * k, 1e-4, 1e-4)));
    }
  }
  cloud.weights.assign(cloud.samples.size(), 1.0 / cloud.samples.size());
  const double ratio_in = occupancy_ratio(cloud, 0.005);
  const PoseCloud out = cluster_resample(cloud, 0.005, 400, 11);
  CHECK(occupancy_ratio(out, 0.005) <= ratio_in);
  CHECK(out.size() == 400);
}

TEST_CASE("cluster_resample: two-cluster 90/10 split evens out") {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> jitter(0.0, 0.004);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PoseCloud cloud;
    for (int i = 0; i < 900; ++i) {
      cloud.samples.push_back(
          Pose::from_translation(Vec3(jitter(rng), jitter(rng), 0)));
    }
    for (int i = 0; i < 100; ++i) {
      cloud.samples.push_back(
          Pose::from_translation(Vec3(0.1 + jitter(rng), 0, 0)));
    }
    cloud.weights.assign(1000, 1e-3);
    const PoseCloud out = cluster_resample(cloud, 0.005, 500, seed);
    int near = 0;
    for (const Pose& p : out.samples) {
      if (p.translation().x() < 0.05) ++near;
    }
    const double share = near / 500.0;
    CHECK(share > 0.4);
    CHECK(share < 0.6);
  }
}

TEST_CASE("cluster_resample: membership and weights") {
  const RawTrajectory traj =
      synthesize_task(TaskLabel::pick_place, GeneratorSettings{25.0, 8.0}, 4);
  const PoseCloud cloud = extract_local_variation(traj, 2.0);
  const int target = cloud.size();
  const PoseCloud out = cluster_resample(cloud, 0.005, target, 17);
  out.validate();
  for (double w : out.weights) CHECK(w == 1.0 / target);
  // Every output pose is a member of the input cloud.
  for (const Pose& p : out.samples) {
    bool found = false;
    for (const Pose& q : cloud.samples) {
      if (p.distance(q) == 0.0) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("cluster_resample: second pass does not worsen occupancy") {
  const RawTrajectory traj =
      synthesize_task(TaskLabel::suturing, GeneratorSettings{50.0, 10.0}, 6);
  const PoseCloud cloud = extract_local_variation(traj, 2.0);
  const PoseCloud once = cluster_resample(cloud, 0.005, 300, 23);
  const PoseCloud twice = cluster_resample(once, 0.005, 300, 23);
  CHECK(occupancy_ratio(twice, 0.005) <=
        occupancy_ratio(once, 0.005) + 1e-12);
}

TEST_CASE("synthesize: determinism per seed") {
  const GeneratorSettings gen{50.0, 5.0};
  const RawTrajectory a = synthesize_task(TaskLabel::suturing, gen, 99);
  const RawTrajectory b = synthesize_task(TaskLabel::suturing, gen, 99);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].left.distance(b.samples[i].left) == 0.0);
    CHECK(a.samples[i].right.distance(b.samples[i].right) == 0.0);
  }
  const RawTrajectory c = synthesize_task(TaskLabel::suturing, gen, 100);
  CHECK(c.samples[10].left.distance(a.samples[10].left) > 0.0);
}

TEST_CASE("synthesize: suturing stays small with a wide orientation sweep") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const RawTrajectory traj =
        synthesize_task(TaskLabel::suturing, GeneratorSettings{50.0, 20.0}, seed);
    traj.validate();
    CHECK(translation_extent(traj) <= 0.02);
    CHECK(orientation_sweep(traj) >= 100.0 * M_PI / 180.0);
  }
}

TEST_CASE("synthesize: pick_place spans at least 4x the suturing extent") {
  const GeneratorSettings gen{50.0, 20.0};
  const double pick =
      translation_extent(synthesize_task(TaskLabel::pick_place, gen, 5));
  const double sut =
      translation_extent(synthesize_task(TaskLabel::suturing, gen, 5));
  CHECK(pick >= 4.0 * sut);
}

TEST_CASE("synthesize: all four labels produce valid trajectories") {
  for (TaskLabel label : kAllTaskLabels) {
    const RawTrajectory traj =
        synthesize_task(label, GeneratorSettings{25.0, 4.0}, 8);
    traj.validate();
    CHECK(traj.samples.size() == 100);
    for (const TrajectorySample& s : traj.samples) {
      CHECK(is_rotation(s.left.rotation(), 1e-9));
      CHECK(is_rotation(s.right.rotation(), 1e-9));
    }
  }
  CHECK_THROWS_AS(parse_task_label("sewing"), UnknownLabel);
}

TEST_CASE("merge_clouds: weights renormalize") {
  const GeneratorSettings gen{25.0, 4.0};
  const PoseCloud a = extract_local_variation(
      synthesize_task(TaskLabel::suturing, gen, 1), 2.0);
  const PoseCloud b = extract_local_variation(
      synthesize_task(TaskLabel::cutting, gen, 2), 2.0);
  const PoseCloud m = merge_clouds({a, b});
  m.validate();
  CHECK(m.size() == a.size() + b.size());
  CHECK(m.sources.size() == 2);
}
