#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "p4p/geometry.hpp"
#include "p4p/p4p_solver.hpp"
#include "p4p/simulation.hpp"

namespace p4p {

/// Malformed or schema-invalid scenario document.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix rotations further than this from SO(3) are rejected; closer ones are
// re-orthogonalized.
inline constexpr double kInputRotationTol = 1e-6;

/// In-memory form of a scenario document:
///
///   {
///     "target":       {"points": [[x, y], ...]},
///     "intrinsics":   {"fx": .., "fy": .., "cx": 0, "cy": 0, "skew": 0},
///     "pose":         {"rotation": [r11, ..., r33] |
///                                  {"convention": "zxy", "heading": .., "pitch": .., "roll": ..},
///                      "translation": [x, y, z]},
///     "observations": {"pixels": [[u, v], ...]},                 (optional)
///     "noise":        {"snr_db": 15 | "inf" | null, "trials": 1000, "seed": 1},
///     "extrinsics":   {"vehicle_in_camera": <pose>, "landmark_in_world": <pose>},  (optional)
///     "sweep":        {"snr_db": [15, 16, ...]}                  (optional)
///   }
struct ScenarioFile {
  PlanarTarget target;
  CameraIntrinsics intrinsics = reference_intrinsics();
  Pose pose;
  std::optional<ObservationSet> observations;
  double snr_db = kNoiselessSnr;
  int trials = 1000;
  std::uint64_t seed = 0;
  Pose vehicle_in_camera;
  Pose landmark_in_world;
  std::vector<double> sweep_snr_db;

  Scenario to_scenario() const;
};

/// Accepts a near-rotation (drift <= kInputRotationTol) and projects it onto
/// SO(3); throws SchemaError beyond that.
RotationMatrix rotation_from_input(const Mat3& m);

ScenarioFile parse_scenario(const nlohmann::json& doc);
ScenarioFile load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioFile& file);

}  // namespace p4p
