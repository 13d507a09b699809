#include "p4p/scenario_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "p4p/attitude.hpp"
#include "p4p/error.hpp"

namespace p4p {

using nlohmann::json;

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
  throw SchemaError(fmt::format("{}: {}", where, what));
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_fail(where, "must be finite");
  return v;
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_fail(where, fmt::format("missing key '{}'", key));
  return *it;
}

std::vector<Vec2> pairs(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where, "expected an array of [a, b] pairs");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = fmt::format("{}[{}]", where, i);
    if (!j[i].is_array() || j[i].size() != 2) schema_fail(at, "expected [a, b]");
    out.emplace_back(number(j[i][0], at), number(j[i][1], at));
  }
  return out;
}

Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) schema_fail(where, "expected 3 numbers");
  return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

RotationMatrix parse_rotation(const json& j, const std::string& where) {
  if (j.is_array()) {
    if (j.size() != 9) schema_fail(where, "rotation matrix needs 9 row-major numbers");
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = number(j[i], where);
    try {
      return rotation_from_input(m);
    } catch (const SchemaError& e) {
      schema_fail(where, e.what());
    }
  }
  if (j.is_object()) {
    const std::string convention = j.value("convention", std::string("zxy"));
    if (convention != "zxy") {
      schema_fail(where, fmt::format("unsupported Euler convention '{}' (only zxy)", convention));
    }
    EulerAngles e{number(require(j, "heading", where), where + ".heading"),
                  number(require(j, "pitch", where), where + ".pitch"),
                  number(require(j, "roll", where), where + ".roll")};
    return rotation_from_euler(e);
  }
  schema_fail(where, "rotation must be a 9-element array or an Euler object");
}

Pose parse_pose(const json& j, const std::string& where) {
  return {parse_rotation(require(j, "rotation", where), where + ".rotation"),
          vec3(require(j, "translation", where), where + ".translation")};
}

double parse_snr(const json& j, const std::string& where) {
  if (j.is_null()) return kNoiselessSnr;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "none") return kNoiselessSnr;
    schema_fail(where, "expected a number, \"inf\" or null");
  }
  return number(j, where);
}

json pose_json(const Pose& p) {
  json rot = json::array();
  for (int i = 0; i < 9; ++i) rot.push_back(p.rotation.matrix()(i / 3, i % 3));
  return {{"rotation", rot},
          {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}}};
}

json pairs_json(const std::vector<Vec2>& v) {
  json a = json::array();
  for (const Vec2& p : v) a.push_back({p.x(), p.y()});
  return a;
}

}  // namespace

RotationMatrix rotation_from_input(const Mat3& m) {
  const double drift = orthogonality_error(m);
  if (!(drift <= kInputRotationTol) || !(m.determinant() > 0.0)) {
    throw SchemaError(fmt::format(
        "matrix is not a rotation (orthogonality error {:.3g}, det {:.6g}; tolerance {:.0e})",
        drift, m.determinant(), kInputRotationTol));
  }
  return is_rotation(m) ? RotationMatrix(m) : gram_schmidt_so3(m);
}

Scenario ScenarioFile::to_scenario() const {
  Scenario sc;
  sc.target = target;
  sc.true_pose = pose;
  sc.intrinsics = intrinsics;
  sc.snr_db = snr_db;
  sc.trials = trials;
  sc.seed = seed;
  return sc;
}

ScenarioFile parse_scenario(const json& doc) {
  if (!doc.is_object()) schema_fail("document", "expected a JSON object");
  ScenarioFile f;

  f.target.points = pairs(require(require(doc, "target", "document"), "points", "target"),
                          "target.points");
  if (f.target.size() < 4) {
    schema_fail("target.points", fmt::format("need at least 4 points, got {}", f.target.size()));
  }

  if (doc.contains("intrinsics")) {
    const json& k = doc["intrinsics"];
    const double fx = number(require(k, "fx", "intrinsics"), "intrinsics.fx");
    const double fy = number(require(k, "fy", "intrinsics"), "intrinsics.fy");
    const double cx = k.contains("cx") ? number(k["cx"], "intrinsics.cx") : 0.0;
    const double cy = k.contains("cy") ? number(k["cy"], "intrinsics.cy") : 0.0;
    const double skew = k.contains("skew") ? number(k["skew"], "intrinsics.skew") : 0.0;
    if (!(fx > 0.0) || !(fy > 0.0)) schema_fail("intrinsics", "fx and fy must be positive");
    f.intrinsics = CameraIntrinsics(fx, fy, cx, cy, skew);
  }

  if (doc.contains("pose")) f.pose = parse_pose(doc["pose"], "pose");

  if (doc.contains("observations")) {
    ObservationSet obs;
    obs.pixels = pairs(require(doc["observations"], "pixels", "observations"),
                       "observations.pixels");
    if (obs.size() != f.target.size()) {
      schema_fail("observations.pixels",
                  fmt::format("{} pixels for {} target points", obs.size(), f.target.size()));
    }
    f.observations = std::move(obs);
  }

  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    if (!n.is_object()) schema_fail("noise", "expected an object");
    if (n.contains("snr_db")) f.snr_db = parse_snr(n["snr_db"], "noise.snr_db");
    if (n.contains("trials")) {
      if (!n["trials"].is_number_integer() || n["trials"].get<long long>() < 1) {
        schema_fail("noise.trials", "expected a positive integer");
      }
      f.trials = n["trials"].get<int>();
    }
    if (n.contains("seed")) {
      if (!n["seed"].is_number_integer() || n["seed"].get<long long>() < 0) {
        schema_fail("noise.seed", "expected a non-negative integer");
      }
      f.seed = n["seed"].get<std::uint64_t>();
    }
  }

  if (doc.contains("extrinsics")) {
    const json& e = doc["extrinsics"];
    if (!e.is_object()) schema_fail("extrinsics", "expected an object");
    if (e.contains("vehicle_in_camera")) {
      f.vehicle_in_camera = parse_pose(e["vehicle_in_camera"], "extrinsics.vehicle_in_camera");
    }
    if (e.contains("landmark_in_world")) {
      f.landmark_in_world = parse_pose(e["landmark_in_world"], "extrinsics.landmark_in_world");
    }
  }

  if (doc.contains("sweep")) {
    const json& s = require(doc["sweep"], "snr_db", "sweep");
    if (!s.is_array()) schema_fail("sweep.snr_db", "expected an array of numbers");
    for (const json& v : s) f.sweep_snr_db.push_back(number(v, "sweep.snr_db"));
  }
  return f;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(fmt::format("cannot open scenario file '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_scenario(doc);
}

json to_json(const ScenarioFile& f) {
  json doc;
  doc["target"]["points"] = pairs_json(f.target.points);
  doc["intrinsics"] = {{"fx", f.intrinsics.fx()}, {"fy", f.intrinsics.fy()},
                       {"cx", f.intrinsics.cx()}, {"cy", f.intrinsics.cy()},
                       {"skew", f.intrinsics.skew()}};
  doc["pose"] = pose_json(f.pose);
  if (f.observations) doc["observations"]["pixels"] = pairs_json(f.observations->pixels);
  doc["noise"] = {{"snr_db", std::isinf(f.snr_db) ? json("inf") : json(f.snr_db)},
                  {"trials", f.trials},
                  {"seed", f.seed}};
  doc["extrinsics"] = {{"vehicle_in_camera", pose_json(f.vehicle_in_camera)},
                       {"landmark_in_world", pose_json(f.landmark_in_world)}};
  if (!f.sweep_snr_db.empty()) doc["sweep"]["snr_db"] = f.sweep_snr_db;
  return doc;
}

}  // namespace p4p
