// bimorph - file formats: trajectory/cloud/trace CSV, design JSON, series
// SPDX-License-Identifier: Apache-2.0
#include "bimorph/io.hpp"

#include <Eigen/Geometry>
#include <charconv>
#include <fstream>
#include <sstream>

namespace bimorph {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw IoError("bad numeric field: '" + s + "'");
  }
  return v;
}

Eigen::Vector4d quaternion_of(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  Eigen::Vector4d out(q.w(), q.x(), q.y(), q.z());
  if (out[0] < 0.0 ||
      (out[0] == 0.0 && (out[1] < 0.0 || (out[1] == 0.0 && out[2] < 0.0)))) {
    out = -out;
  }
  return out;
}

Mat3 rotation_of_quaternion(const Eigen::Vector4d& wxyz) {
  Eigen::Quaterniond q(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
  const double n = q.norm();
  if (std::abs(n - 1.0) > 1e-3) {
    throw IoError("quaternion not normalized");
  }
  q.normalize();
  return q.toRotationMatrix();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void require_header(const std::vector<std::string>& lines,
                    const std::string& expected,
                    const std::filesystem::path& path) {
  if (lines.empty() || lines.front() != expected) {
    throw IoError(path.string() + ": expected header '" + expected + "'");
  }
}

std::string pose_fields(const Pose& p) {
  const Eigen::Vector4d q = quaternion_of(p.rotation());
  std::string s;
  for (int i = 0; i < 3; ++i) s += format_double(p.translation()[i]) + ",";
  s += format_double(q[0]) + "," + format_double(q[1]) + "," +
       format_double(q[2]) + "," + format_double(q[3]);
  return s;
}

Pose pose_of_fields(const std::vector<std::string>& f, int offset) {
  const Vec3 t(parse_double(f[offset]), parse_double(f[offset + 1]),
               parse_double(f[offset + 2]));
  const Eigen::Vector4d q(parse_double(f[offset + 3]),
                          parse_double(f[offset + 4]),
                          parse_double(f[offset + 5]),
                          parse_double(f[offset + 6]));
  return Pose(rotation_of_quaternion(q), t);
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path,
                          const RawTrajectory& traj) {
  std::string out = "t,arm,x,y,z,qw,qx,qy,qz\n";
  for (const TrajectorySample& s : traj.samples) {
    out += format_double(s.t) + ",L," + pose_fields(s.left) + "\n";
    out += format_double(s.t) + ",R," + pose_fields(s.right) + "\n";
  }
  write_text_file(path, out);
}

RawTrajectory read_trajectory_csv(const std::filesystem::path& path,
                                  TaskLabel label) {
  const auto lines = read_lines(path);
  require_header(lines, "t,arm,x,y,z,qw,qx,qy,qz", path);

  RawTrajectory traj;
  traj.label = label;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 9) throw IoError(path.string() + ": bad field count");
    const double t = parse_double(f[0]);
    const Pose p = pose_of_fields(f, 2);
    if (traj.samples.empty() || traj.samples.back().t != t) {
      traj.samples.push_back({t, Pose(), Pose()});
    }
    if (f[1] == "L") {
      traj.samples.back().left = p;
    } else if (f[1] == "R") {
      traj.samples.back().right = p;
    } else {
      throw IoError(path.string() + ": arm must be L or R");
    }
  }
  traj.validate();
  return traj;
}

void write_cloud_csv(const std::filesystem::path& path,
                     const PoseCloud& cloud) {
  std::string out = "arm,x,y,z,qw,qx,qy,qz,weight\n";
  for (int i = 0; i < cloud.size(); ++i) {
    out += "L," + pose_fields(cloud.samples[i]) + "," +
           format_double(cloud.weights[i]) + "\n";
  }
  write_text_file(path, out);
}

PoseCloud read_cloud_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  require_header(lines, "arm,x,y,z,qw,qx,qy,qz,weight", path);
  PoseCloud cloud;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 9) throw IoError(path.string() + ": bad field count");
    cloud.samples.push_back(pose_of_fields(f, 1));
    cloud.weights.push_back(parse_double(f[8]));
  }
  cloud.validate();
  return cloud;
}

void write_anneal_trace_csv(const std::filesystem::path& path,
                            const AnnealTrace& trace) {
  std::string out = "iter,cost,accepted,temperature,best_cost\n";
  for (const AnnealTraceRow& r : trace.rows) {
    out += std::to_string(r.iter) + "," + format_double(r.candidate_cost) +
           "," + (r.accepted ? "1" : "0") + "," +
           format_double(r.temperature) + "," + format_double(r.best_cost) +
           "\n";
  }
  write_text_file(path, out);
}

void write_motion_trace_csv(const std::filesystem::path& path,
                            const MotionTrace& trace) {
  const DexterityReport rep = evaluate_trace(trace);
  std::string out = "t,seg,q_1,q_2,q_3,q_4,q_5,q_6,q_7,dext,H,scaleK\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    const std::string tail = "," + format_double(rep.composite[i]) + "," +
                             format_double(s.h_value) + "," +
                             format_double(s.scale_base) + "\n";
    std::string row = format_double(s.state.time) + ",K";
    for (int j = 0; j < 6; ++j) row += "," + format_double(s.state.q_base[j]);
    out += row + "," + tail;  // q_7 left empty for the 6-DOF base
    for (int arm = 0; arm < 2; ++arm) {
      const JointVector& q = arm == 0 ? s.state.q_left : s.state.q_right;
      row = format_double(s.state.time) + (arm == 0 ? ",L" : ",R");
      for (int j = 0; j < 7; ++j) row += "," + format_double(q[j]);
      out += row + tail;
    }
  }
  write_text_file(path, out);
}

void write_dexterity_csv(const std::filesystem::path& path,
                         const DexterityReport& report) {
  std::string out = "index,condition,manipulability,joint_limit,composite\n";
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const PointMetrics& p = report.points[i];
    out += std::to_string(i) + "," + format_double(p.condition_term) + "," +
           format_double(p.manipulability_term) + "," +
           format_double(p.joint_limit_term) + "," +
           format_double(report.composite[i]) + "\n";
  }
  write_text_file(path, out);
}

Json dexterity_summary_json(const DexterityReport& report) {
  Json j;
  j["schema"] = "bimorph-dexterity-v1";
  j["points"] = report.points.size();
  j["composite"] = {{"mean", report.mean},
                    {"std", report.std_dev},
                    {"min", report.min},
                    {"max", report.max}};
  const auto term_stats = [&](auto getter) {
    double mean = 0, sq = 0, lo = 1e300, hi = -1e300;
    int finite = 0;
    for (const PointMetrics& p : report.points) {
      const double v = getter(p);
      if (!std::isfinite(v)) continue;
      ++finite;
      mean += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (finite > 0) mean /= finite;
    for (const PointMetrics& p : report.points) {
      const double v = getter(p);
      if (std::isfinite(v)) sq += (v - mean) * (v - mean);
    }
    return Json{{"mean", mean},
                {"std", finite > 0 ? std::sqrt(sq / finite) : 0.0},
                {"min", finite > 0 ? lo : 0.0},
                {"max", finite > 0 ? hi : 0.0}};
  };
  j["condition"] =
      term_stats([](const PointMetrics& p) { return p.condition_term; });
  j["manipulability"] =
      term_stats([](const PointMetrics& p) { return p.manipulability_term; });
  j["joint_limit"] =
      term_stats([](const PointMetrics& p) { return p.joint_limit_term; });
  return j;
}

void write_series(const std::filesystem::path& path,
                  const std::vector<std::pair<double, double>>& xy) {
  std::string out;
  for (const auto& [x, y] : xy) {
    out += format_double(x) + " " + format_double(y) + "\n";
  }
  write_text_file(path, out);
}

namespace {

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_of(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

void write_design_json(const std::filesystem::path& path,
                       const BilateralDesign& design) {
  Json j;
  j["schema"] = "bimorph-design-v1";
  Json arm;
  arm["joints"] = Json::array();
  for (const JointSpec& js : design.arm.joints()) {
    arm["joints"].push_back({{"axis", vec3_json(js.axis_direction)},
                             {"point", vec3_json(js.axis_point)},
                             {"limits", Json::array({js.lower, js.upper})}});
  }
  const Eigen::Vector4d q = quaternion_of(design.arm.home().rotation());
  arm["home"] = {{"quaternion", Json::array({q[0], q[1], q[2], q[3]})},
                 {"translation", vec3_json(design.arm.home().translation())}};
  arm["wrist_index"] = design.arm.wrist_index() + 1;  // 1-based in the file
  j["arm"] = arm;
  j["base_offset"] = vec3_json(design.base_offset);
  j["center_distance"] = design.center_distance;
  j["tool_offset"] = vec3_json(design.tool_offset);
  write_text_file(path, j.dump(2) + "\n");
}

BilateralDesign read_design_json(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  try {
    if (j.at("schema") != "bimorph-design-v1") {
      throw IoError("unsupported design schema");
    }
    const Json& arm = j.at("arm");
    std::vector<JointSpec> joints;
    for (const Json& js : arm.at("joints")) {
      JointSpec spec;
      spec.axis_direction = vec3_of(js.at("axis")).normalized();
      spec.axis_point = vec3_of(js.at("point"));
      spec.lower = js.at("limits").at(0).get<double>();
      spec.upper = js.at("limits").at(1).get<double>();
      joints.push_back(spec);
    }
    const Json& home = arm.at("home");
    Eigen::Vector4d q;
    for (int i = 0; i < 4; ++i) q[i] = home.at("quaternion").at(i).get<double>();
    const Pose home_pose(rotation_of_quaternion(q),
                         vec3_of(home.at("translation")));
    BilateralDesign d;
    d.arm = ChainDesign(std::move(joints), home_pose,
                        arm.at("wrist_index").get<int>() - 1);
    d.base_offset = vec3_of(j.at("base_offset"));
    d.center_distance = j.at("center_distance").get<double>();
    d.tool_offset = vec3_of(j.at("tool_offset"));
    d.arm.validate_arm();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bimorph
