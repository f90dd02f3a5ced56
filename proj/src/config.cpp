// bimorph - declarative run configuration with a strict JSON schema
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/config.hpp"

#include <set>

#include "bimorph/io.hpp"

namespace bimorph {

namespace {

using Json = nlohmann::ordered_json;

void reject_unknown(const Json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void get_to(const Json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      j.at(key).get_to(out);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " +
                        e.what());
    }
  }
}

void get_vec3(const Json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  const Json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) {
    throw ConfigError(std::string("'") + key + "' must be a 3-array");
  }
  for (int i = 0; i < 3; ++i) out[i] = a[i].get<double>();
}

void get_vec6(const Json& j, const char* key, Vec6& out) {
  if (!j.contains(key)) return;
  const Json& a = j.at(key);
  if (!a.is_array() || a.size() != 6) {
    throw ConfigError(std::string("'") + key + "' must be a 6-array");
  }
  for (int i = 0; i < 6; ++i) out[i] = a[i].get<double>();
}

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json vec6_json(const Vec6& v) {
  Json a = Json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v[i]);
  return a;
}

Pose pose_of(const Json& j, const std::string& where) {
  reject_unknown(j, {"translation", "quaternion"}, where);
  Vec3 t = Vec3::Zero();
  get_vec3(j, "translation", t);
  Mat3 r = Mat3::Identity();
  if (j.contains("quaternion")) {
    const Json& q = j.at("quaternion");
    if (!q.is_array() || q.size() != 4) {
      throw ConfigError(where + ".quaternion must be a 4-array [w,x,y,z]");
    }
    r = rotation_of_quaternion(Eigen::Vector4d(
        q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
        q[3].get<double>()));
  }
  return Pose(r, t);
}

Json pose_json(const Pose& p) {
  const Eigen::Vector4d q = quaternion_of(p.rotation());
  return Json{{"translation", vec3_json(p.translation())},
              {"quaternion", Json::array({q[0], q[1], q[2], q[3]})}};
}

void parse_ik(const Json& j, IkSettings& ik, const std::string& where) {
  reject_unknown(j,
                 {"step_size", "tolerance", "max_iters", "damping",
                  "rcond_threshold", "error_weight"},
                 where);
  get_to(j, "step_size", ik.step_size);
  get_to(j, "tolerance", ik.tolerance);
  get_to(j, "max_iters", ik.max_iters);
  get_to(j, "damping", ik.damping);
  get_to(j, "rcond_threshold", ik.rcond_threshold);
  get_vec6(j, "error_weight", ik.error_weight);
  if (!(ik.step_size > 0.0 && ik.step_size <= 1.0)) {
    throw ConfigError(where + ".step_size must be in (0, 1]");
  }
  if (!(ik.tolerance > 0.0)) throw ConfigError(where + ".tolerance must be > 0");
  if (ik.damping < 0.0) throw ConfigError(where + ".damping must be >= 0");
}

Json ik_json(const IkSettings& ik) {
  return Json{{"step_size", ik.step_size},
              {"tolerance", ik.tolerance},
              {"max_iters", ik.max_iters},
              {"damping", ik.damping},
              {"rcond_threshold", ik.rcond_threshold},
              {"error_weight", vec6_json(ik.error_weight)}};
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::ordered_json& j) {
  RunConfig c;
  reject_unknown(j,
                 {"schema", "seed", "jobs", "ik", "generator", "pipeline",
                  "anneal", "design", "motion", "transition"},
                 "config");
  if (j.contains("schema") && j.at("schema") != "bimorph-config-v1") {
    throw ConfigError("config schema must be bimorph-config-v1");
  }
  get_to(j, "seed", c.seed);
  get_to(j, "jobs", c.jobs);
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");

  if (j.contains("ik")) parse_ik(j.at("ik"), c.ik, "ik");

  if (j.contains("generator")) {
    const Json& g = j.at("generator");
    reject_unknown(g, {"sample_rate", "duration"}, "generator");
    get_to(g, "sample_rate", c.generator.sample_rate);
    get_to(g, "duration", c.generator.duration);
    if (!(c.generator.sample_rate > 0.0) || !(c.generator.duration > 0.0)) {
      throw ConfigError("generator rates and durations must be positive");
    }
  }

  if (j.contains("pipeline")) {
    const Json& p = j.at("pipeline");
    reject_unknown(p, {"window", "grid_cell", "target_count"}, "pipeline");
    get_to(p, "window", c.pipeline.window);
    get_to(p, "grid_cell", c.pipeline.grid_cell);
    get_to(p, "target_count", c.pipeline.target_count);
    if (!(c.pipeline.window > 0.0) || !(c.pipeline.grid_cell > 0.0) ||
        c.pipeline.target_count < 1) {
      throw ConfigError("pipeline values must be positive");
    }
  }

  if (j.contains("anneal")) {
    const Json& a = j.at("anneal");
    reject_unknown(a,
                   {"initial_temp", "decay_rate", "max_iters", "stall_iters",
                    "stall_tolerance", "axis_angle_scale", "axis_point_scale",
                    "base_offset_scale", "w1", "w2", "ik",
                    "optimize_base_offset"},
                   "anneal");
    get_to(a, "initial_temp", c.anneal.initial_temp);
    get_to(a, "decay_rate", c.anneal.decay_rate);
    get_to(a, "max_iters", c.anneal.max_iters);
    get_to(a, "stall_iters", c.anneal.stall_iters);
    get_to(a, "stall_tolerance", c.anneal.stall_tolerance);
    get_to(a, "axis_angle_scale", c.anneal.scales.axis_angle);
    get_to(a, "axis_point_scale", c.anneal.scales.axis_point);
    get_to(a, "base_offset_scale", c.anneal.scales.base_offset);
    get_vec6(a, "w1", c.anneal.w1_diag);
    get_to(a, "w2", c.anneal.w2);
    get_to(a, "optimize_base_offset", c.anneal.optimize_base_offset);
    if (a.contains("ik")) parse_ik(a.at("ik"), c.anneal.ik, "anneal.ik");
    if (!(c.anneal.decay_rate > 0.0 && c.anneal.decay_rate < 1.0)) {
      throw ConfigError("anneal.decay_rate must be in (0, 1)");
    }
    if (!(c.anneal.initial_temp > 0.0)) {
      throw ConfigError("anneal.initial_temp must be > 0");
    }
  }

  if (j.contains("design")) {
    const Json& d = j.at("design");
    reject_unknown(
        d, {"joint_limit", "base_offset", "center_distance", "tool_offset"},
        "design");
    get_to(d, "joint_limit", c.design.joint_limit);
    get_vec3(d, "base_offset", c.design.base_offset);
    get_to(d, "center_distance", c.design.center_distance);
    get_vec3(d, "tool_offset", c.design.tool_offset);
  }

  if (j.contains("motion")) {
    const Json& m = j.at("motion");
    reject_unknown(m,
                   {"kp", "q_weight", "mass_base", "mass_arm", "beta_base",
                    "beta_arm", "activate_base", "activate_arms", "damping",
                    "rcond_threshold", "q_base0", "left_target_offset",
                    "right_target_offset", "init_ik"},
                   "motion");
    get_to(m, "kp", c.transition.kp);
    get_vec3(m, "q_weight", c.transition.q_weight);
    double mass_base = c.transition.motion.mass.base_diag[0];
    double mass_arm = c.transition.motion.mass.arm_diag[0];
    get_to(m, "mass_base", mass_base);
    get_to(m, "mass_arm", mass_arm);
    if (!(mass_base > 0.0 && mass_arm > 0.0)) {
      throw ConfigError("motion masses must be positive");
    }
    c.transition.motion.mass.base_diag.setConstant(mass_base);
    c.transition.motion.mass.arm_diag.setConstant(mass_arm);
    get_to(m, "beta_base", c.transition.motion.mass.beta_base);
    get_to(m, "beta_arm", c.transition.motion.mass.beta_arm);
    get_to(m, "activate_base", c.transition.motion.mass.activate_base);
    get_to(m, "activate_arms", c.transition.motion.mass.activate_arms);
    get_to(m, "damping", c.transition.motion.damping);
    get_to(m, "rcond_threshold", c.transition.motion.rcond_threshold);
    if (m.contains("q_base0")) {
      const Json& q = m.at("q_base0");
      if (!q.is_array() || q.size() != 6) {
        throw ConfigError("motion.q_base0 must be a 6-array");
      }
      for (int i = 0; i < 6; ++i) c.transition.q_base0[i] = q[i].get<double>();
    }
    if (m.contains("left_target_offset")) {
      c.transition.left_target_offset =
          pose_of(m.at("left_target_offset"), "motion.left_target_offset");
    }
    if (m.contains("right_target_offset")) {
      c.transition.right_target_offset =
          pose_of(m.at("right_target_offset"), "motion.right_target_offset");
    }
    if (m.contains("init_ik")) {
      parse_ik(m.at("init_ik"), c.transition.init_ik, "motion.init_ik");
    }
  }

  if (j.contains("transition")) {
    const Json& t = j.at("transition");
    reject_unknown(t, {"w1", "w2", "duration", "dt"}, "transition");
    if (t.contains("w1")) c.fixture.w1 = pose_of(t.at("w1"), "transition.w1");
    if (t.contains("w2")) c.fixture.w2 = pose_of(t.at("w2"), "transition.w2");
    get_to(t, "duration", c.fixture.duration);
    get_to(t, "dt", c.fixture.dt);
    if (!(c.fixture.duration > 0.0) || !(c.fixture.dt > 0.0)) {
      throw ConfigError("transition duration and dt must be positive");
    }
  }
  return c;
}

RunConfig RunConfig::load_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json RunConfig::to_json() const {
  Json j;
  j["schema"] = "bimorph-config-v1";
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["ik"] = ik_json(ik);
  j["generator"] = {{"sample_rate", generator.sample_rate},
                    {"duration", generator.duration}};
  j["pipeline"] = {{"window", pipeline.window},
                   {"grid_cell", pipeline.grid_cell},
                   {"target_count", pipeline.target_count}};
  j["anneal"] = {{"initial_temp", anneal.initial_temp},
                 {"decay_rate", anneal.decay_rate},
                 {"max_iters", anneal.max_iters},
                 {"stall_iters", anneal.stall_iters},
                 {"stall_tolerance", anneal.stall_tolerance},
                 {"axis_angle_scale", anneal.scales.axis_angle},
                 {"axis_point_scale", anneal.scales.axis_point},
                 {"base_offset_scale", anneal.scales.base_offset},
                 {"w1", vec6_json(anneal.w1_diag)},
                 {"w2", anneal.w2},
                 {"ik", ik_json(anneal.ik)},
                 {"optimize_base_offset", anneal.optimize_base_offset}};
  j["design"] = {{"joint_limit", design.joint_limit},
                 {"base_offset", vec3_json(design.base_offset)},
                 {"center_distance", design.center_distance},
                 {"tool_offset", vec3_json(design.tool_offset)}};
  j["motion"] = {{"kp", transition.kp},
                 {"q_weight", vec3_json(transition.q_weight)},
                 {"mass_base", transition.motion.mass.base_diag[0]},
                 {"mass_arm", transition.motion.mass.arm_diag[0]},
                 {"beta_base", transition.motion.mass.beta_base},
                 {"beta_arm", transition.motion.mass.beta_arm},
                 {"activate_base", transition.motion.mass.activate_base},
                 {"activate_arms", transition.motion.mass.activate_arms},
                 {"damping", transition.motion.damping},
                 {"rcond_threshold", transition.motion.rcond_threshold},
                 {"q_base0", Json::array({transition.q_base0[0],
                                          transition.q_base0[1],
                                          transition.q_base0[2],
                                          transition.q_base0[3],
                                          transition.q_base0[4],
                                          transition.q_base0[5]})},
                 {"left_target_offset", pose_json(transition.left_target_offset)},
                 {"right_target_offset",
                  pose_json(transition.right_target_offset)},
                 {"init_ik", ik_json(transition.init_ik)}};
  j["transition"] = {{"w1", pose_json(fixture.w1)},
                     {"w2", pose_json(fixture.w2)},
                     {"duration", fixture.duration},
                     {"dt", fixture.dt}};
  return j;
}

BilateralDesign RunConfig::make_bilateral(const ChainDesign& arm) const {
  BilateralDesign b;
  b.arm = arm;
  b.base_offset = design.base_offset;
  b.center_distance = design.center_distance;
  b.tool_offset = design.tool_offset;
  return b;
}

BilateralDesign RunConfig::make_bilateral(const DesignVector& d) const {
  return make_bilateral(d.to_chain(design.joint_limit, design.tool_offset));
}

}  // namespace bimorph
