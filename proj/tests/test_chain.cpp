// bimorph tests - chain model, FK, Jacobians, mirroring, the bilateral tree
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "bimorph/chain.hpp"
#include "bimorph/design_opt.hpp"
#include "oracles.hpp"

using namespace bimorph;

namespace {

ChainDesign z_axis_chain(int dof, const Pose& home) {
  std::vector<JointSpec> joints(dof);
  for (JointSpec& j : joints) j = {Vec3::UnitZ(), Vec3::Zero(), -M_PI, M_PI};
  return ChainDesign(std::move(joints), home);
}

JointVector random_q(std::mt19937_64& rng, int n, double scale = 1.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  JointVector q(n);
  for (int i = 0; i < n; ++i) q[i] = u(rng);
  return q;
}

}  // namespace

TEST_CASE("fk: zero configuration returns the home pose exactly") {
  std::mt19937_64 rng(101);
  const ChainDesign arm = random_design(rng).to_chain();
  const Pose t = fk(arm, JointVector::Zero(7));
  CHECK(t.distance(arm.home()) == 0.0);
}

TEST_CASE("fk: one active z joint rotates the home offset") {
  const ChainDesign chain =
      z_axis_chain(7, Pose::from_translation(Vec3(1, 0, 0)));
  JointVector q = JointVector::Zero(7);
  q[0] = M_PI / 2.0;
  const Pose t = fk(chain, q);
  CHECK((t.translation() - Vec3(0, 1, 0)).norm() < 1e-15);
}

TEST_CASE("fk: matches the conjugation oracle on random designs") {
  std::mt19937_64 rng(103);
  for (int i = 0; i < 25; ++i) {
    const ChainDesign arm = random_design(rng).to_chain();
    const JointVector q = random_q(rng, 7);
    const Mat4 expected = oracles::conjugation_fk(arm, q);
    CHECK((fk(arm, q).matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("fk: dimension mismatch throws") {
  std::mt19937_64 rng(105);
  const ChainDesign arm = random_design(rng).to_chain();
  CHECK_THROWS_AS(fk(arm, JointVector::Zero(6)), DimensionMismatch);
  CHECK_THROWS_AS(spatial_jacobian(arm, JointVector::Zero(8)),
                  DimensionMismatch);
}

TEST_CASE("fk: repeated evaluation is bit-stable") {
  std::mt19937_64 rng(107);
  const ChainDesign arm = random_design(rng).to_chain();
  const JointVector q = random_q(rng, 7);
  const Mat4 first = fk(arm, q).matrix();
  for (int i = 0; i < 100000; ++i) {
    if ((fk(arm, q).matrix() - first).cwiseAbs().maxCoeff() != 0.0) {
      FAIL("fk drifted at iteration ", i);
    }
  }
}

TEST_CASE("spatial_jacobian: zero configuration stacks the screws") {
  std::mt19937_64 rng(109);
  const ChainDesign arm = random_design(rng).to_chain();
  const Jacobian j = spatial_jacobian(arm, JointVector::Zero(7));
  for (int i = 0; i < 7; ++i) {
    CHECK((j.col(i) - arm.joint(i).screw().vector()).norm() < 1e-15);
  }
}

TEST_CASE("spatial_jacobian: finite-difference oracle") {
  std::mt19937_64 rng(111);
  for (int i = 0; i < 20; ++i) {
    const ChainDesign arm = random_design(rng).to_chain();
    const JointVector q = random_q(rng, 7);
    const Jacobian j = spatial_jacobian(arm, q);
    const Eigen::MatrixXd j_fd = oracles::fd_spatial_jacobian(arm, q);
    const double rel = (j - j_fd).norm() / std::max(1.0, j.norm());
    CHECK(rel < 1e-5);
  }
}

TEST_CASE("spatial_jacobian: parallel z axes give identical angular rows") {
  const ChainDesign chain = z_axis_chain(7, Pose::identity());
  std::mt19937_64 rng(113);
  const Jacobian j = spatial_jacobian(chain, random_q(rng, 7));
  for (int i = 0; i < 7; ++i) {
    CHECK((j.col(i).head<3>() - Vec3::UnitZ()).norm() < 1e-14);
  }
}

TEST_CASE("spatial_jacobian: column i depends only on preceding joints") {
  std::mt19937_64 rng(115);
  const ChainDesign arm = random_design(rng).to_chain();
  const JointVector q = random_q(rng, 7);
  const Jacobian j = spatial_jacobian(arm, q);
  for (int i = 0; i < 7; ++i) {
    JointVector q2 = q;
    for (int k = i; k < 7; ++k) q2[k] += 0.37 + k;  // perturb suffix
    const Jacobian jp = spatial_jacobian(arm, q2);
    CHECK((jp.col(i) - j.col(i)).norm() == 0.0);
  }
}

TEST_CASE("mirror: involution and point reflection") {
  std::mt19937_64 rng(117);
  const ChainDesign arm = random_design(rng).to_chain();
  const ChainDesign twice = mirror(mirror(arm, Vec3::UnitX()), Vec3::UnitX());
  for (int i = 0; i < 7; ++i) {
    CHECK((twice.joint(i).axis_direction - arm.joint(i).axis_direction)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK((twice.joint(i).axis_point - arm.joint(i).axis_point)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  CHECK(twice.home().is_approx(arm.home(), 1e-12));

  const Vec3 reflected = mirror_point(Vec3(0.1, 0.2, 0.0), Vec3::UnitX());
  CHECK((reflected - Vec3(-0.1, 0.2, 0.0)).norm() == 0.0);
}

TEST_CASE("mirror: FK of the mirrored chain is the mirrored FK pose") {
  std::mt19937_64 rng(119);
  for (int i = 0; i < 10; ++i) {
    const ChainDesign arm = random_design(rng).to_chain();
    const Vec3 n = oracles::random_unit(rng);
    const ChainDesign m = mirror(arm, n);
    const JointVector q = random_q(rng, 7);
    const Pose expected = mirror_pose(fk(arm, q), n);
    CHECK(fk(m, q).is_approx(expected, 1e-12));
  }
}

TEST_CASE("validate_arm: accepts the stock arm, rejects broken wrists") {
  DesignVector d = DesignVector::anthropomorphic();
  d.to_chain().validate_arm();

  // Parallel wrist axes must fail.
  d.axis_angles[5] = d.axis_angles[4];
  CHECK_THROWS_AS(d.to_chain().validate_arm(), Error);
}

TEST_CASE("tree_jacobian: zero-config blocks match the pieces") {
  BilateralDesign sys;
  sys.arm = DesignVector::anthropomorphic().to_chain();
  const JointVector qb = JointVector::Zero(6);
  const JointVector qa = JointVector::Zero(7);
  const Eigen::MatrixXd j = tree_jacobian(sys, qb, qa, qa);

  const Mat6 ad = adjoint(base_pose(sys, qb));
  const Jacobian jk = spatial_jacobian(sys.base_chain, qb);
  const Jacobian jl = spatial_jacobian(sys.left_chain_in_base(), qa);
  const Jacobian jr = spatial_jacobian(sys.right_chain_in_base(), qa);

  CHECK((j.block(0, 0, 6, 6) - jk).norm() == 0.0);
  CHECK((j.block(6, 0, 6, 6) - jk).norm() == 0.0);
  CHECK((j.block(0, 6, 6, 7) - ad * jl).norm() == 0.0);
  CHECK((j.block(6, 13, 6, 7) - ad * jr).norm() == 0.0);
  // Cross-arm blocks are exactly zero.
  CHECK(j.block(0, 13, 6, 7).norm() == 0.0);
  CHECK(j.block(6, 6, 6, 7).norm() == 0.0);
}

TEST_CASE("tree_jacobian: right joint rates leave the left twist unchanged") {
  std::mt19937_64 rng(121);
  BilateralDesign sys;
  sys.arm = random_design(rng).to_chain();
  const Eigen::MatrixXd j =
      tree_jacobian(sys, random_q(rng, 6, 0.8), random_q(rng, 7),
                    random_q(rng, 7));
  Eigen::VectorXd qdot = Eigen::VectorXd::Zero(20);
  qdot.segment(13, 7) = random_q(rng, 7);
  CHECK((j.topRows(6) * qdot).norm() == 0.0);
}

TEST_CASE("tree_jacobian: finite-difference oracle on the full tree") {
  std::mt19937_64 rng(123);
  for (int i = 0; i < 5; ++i) {
    BilateralDesign sys;
    sys.arm = random_design(rng).to_chain();
    const JointVector qb = random_q(rng, 6, 0.8);
    const JointVector ql = random_q(rng, 7);
    const JointVector qr = random_q(rng, 7);
    const Eigen::MatrixXd j = tree_jacobian(sys, qb, ql, qr);
    const Eigen::MatrixXd j_fd = oracles::fd_tree_jacobian(sys, qb, ql, qr);
    CHECK((j - j_fd).norm() / std::max(1.0, j.norm()) < 1e-5);
  }
}

TEST_CASE("tree_jacobian: dimension checks") {
  BilateralDesign sys;
  sys.arm = DesignVector::anthropomorphic().to_chain();
  CHECK_THROWS_AS(tree_jacobian(sys, JointVector::Zero(5),
                                JointVector::Zero(7), JointVector::Zero(7)),
                  DimensionMismatch);
}
