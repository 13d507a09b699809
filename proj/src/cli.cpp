#include "p4p/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "p4p/attitude.hpp"
#include "p4p/error.hpp"
#include "p4p/frames.hpp"
#include "p4p/manifold_refiner.hpp"
#include "p4p/p4p_solver.hpp"
#include "p4p/scenario_io.hpp"
#include "p4p/simulation.hpp"

namespace p4p::cli {

using nlohmann::json;

namespace {

enum class Format { kCsv, kJson };

struct GlobalOptions {
  std::string output;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;

  Format fmt() const { return format == "json" ? Format::kJson : Format::kCsv; }
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Minimal CSV table: fixed header, rows of preformatted cells, LF endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void write(std::ostream& os) const {
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

json metadata(std::string_view command, std::optional<std::uint64_t> seed) {
  json m = {{"tool", std::string(kToolName)},
            {"version", std::string(kToolVersion)},
            {"command", std::string(command)},
            {"generator", std::string(kGeneratorId)}};
  if (seed) m["seed"] = *seed;
  return m;
}

void write_metadata_comments(std::ostream& os, const json& meta) {
  os << "# tool=" << meta["tool"].get<std::string>() << ' ' << meta["version"].get<std::string>()
     << '\n';
  os << "# command=" << meta["command"].get<std::string>() << '\n';
  os << "# generator=" << meta["generator"].get<std::string>() << '\n';
  if (meta.contains("seed")) os << "# seed=" << meta["seed"].get<std::uint64_t>() << '\n';
}

std::uint64_t effective_seed(const GlobalOptions& g, const ScenarioFile& f) {
  return g.seed.value_or(f.seed);
}

// ---- solve -----------------------------------------------------------------

struct SolveOptions {
  std::string scenario;
  bool synthesize = false;
  std::optional<double> snr_db;
  bool refine = false;
  double threshold = GimbalConfig{}.threshold;
};

struct SolveRecord {
  std::string method;
  Pose pose;
  EulerAngles euler;
  double objective;
  int iterations;
  bool converged;
  FramePose vehicle_in_world;
  EulerAngles vehicle_euler;
};

SolveRecord make_record(std::string method, const Pose& pose, double objective, int iterations,
                        bool converged, const ScenarioFile& f, const GimbalConfig& gimbal) {
  const FramePose landmark_in_camera(frame::kLandmark, frame::kCamera, pose);
  const FramePose landmark_in_world(frame::kLandmark, frame::kWorld, f.landmark_in_world);
  const FramePose vehicle_in_camera(frame::kVehicle, frame::kCamera, f.vehicle_in_camera);
  const FramePose vehicle = agv_pose_in_world(landmark_in_world, landmark_in_camera,
                                              vehicle_in_camera);
  return {std::move(method),
          pose,
          euler_from_rotation(pose.rotation, gimbal),
          objective,
          iterations,
          converged,
          vehicle,
          euler_from_rotation(vehicle.rotation(), gimbal)};
}

int cmd_solve(const GlobalOptions& g, const SolveOptions& o, std::ostream& out) {
  const GimbalConfig gimbal{o.threshold};
  gimbal.validate();
  const ScenarioFile f = load_scenario(o.scenario);
  const std::uint64_t seed = effective_seed(g, f);

  ObservationSet obs;
  if (o.synthesize) {
    Scenario sc = f.to_scenario();
    obs = synth_observations(sc);
    if (o.snr_db) {
      auto rng = trial_rng(seed, 0);
      obs = add_awgn(obs, *o.snr_db, rng);
    }
  } else if (f.observations) {
    if (o.snr_db) throw UsageError("--snr-db requires --synthesize");
    obs = *f.observations;
  } else {
    throw UsageError("scenario has no observations; pass --synthesize to generate them");
  }

  std::vector<SolveRecord> records;
  const Pose initial = solve_p4p(f.target, obs, f.intrinsics);
  records.push_back(make_record("p4p", initial, objective(initial, f.target, obs, f.intrinsics), 0,
                                true, f, gimbal));
  if (o.refine) {
    const RefineReport rep = refine(initial, f.target, obs, f.intrinsics);
    records.push_back(make_record("refined", rep.pose, rep.final_objective, rep.iterations,
                                  rep.converged, f, gimbal));
  }

  json meta = metadata("solve", std::nullopt);
  if (o.synthesize && o.snr_db) meta["seed"] = seed;

  if (g.fmt() == Format::kJson) {
    json rows = json::array();
    for (const auto& r : records) {
      json rot = json::array();
      for (int i = 0; i < 9; ++i) rot.push_back(r.pose.rotation.matrix()(i / 3, i % 3));
      const Vec3& t = r.pose.translation;
      const Vec3& vt = r.vehicle_in_world.translation();
      rows.push_back({{"method", r.method},
                      {"rotation", rot},
                      {"translation", {t.x(), t.y(), t.z()}},
                      {"euler", {{"heading", r.euler.heading},
                                 {"pitch", r.euler.pitch},
                                 {"roll", r.euler.roll}}},
                      {"objective", r.objective},
                      {"iterations", r.iterations},
                      {"converged", r.converged},
                      {"vehicle_in_world",
                       {{"translation", {vt.x(), vt.y(), vt.z()}},
                        {"euler", {{"heading", r.vehicle_euler.heading},
                                   {"pitch", r.vehicle_euler.pitch},
                                   {"roll", r.vehicle_euler.roll}}}}}});
    }
    out << json{{"metadata", meta}, {"results", rows}}.dump(2) << '\n';
    return kExitOk;
  }

  CsvTable table({"method", "r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33", "t1",
                  "t2", "t3", "heading", "pitch", "roll", "objective", "iterations", "converged",
                  "vehicle_x", "vehicle_y", "vehicle_z", "vehicle_heading", "vehicle_pitch",
                  "vehicle_roll"});
  for (const auto& r : records) {
    std::vector<std::string> row{r.method};
    for (int i = 0; i < 9; ++i) row.push_back(format_real(r.pose.rotation.matrix()(i / 3, i % 3)));
    for (int i = 0; i < 3; ++i) row.push_back(format_real(r.pose.translation(i)));
    row.push_back(format_real(r.euler.heading));
    row.push_back(format_real(r.euler.pitch));
    row.push_back(format_real(r.euler.roll));
    row.push_back(format_real(r.objective));
    row.push_back(std::to_string(r.iterations));
    row.push_back(r.converged ? "1" : "0");
    for (int i = 0; i < 3; ++i) row.push_back(format_real(r.vehicle_in_world.translation()(i)));
    row.push_back(format_real(r.vehicle_euler.heading));
    row.push_back(format_real(r.vehicle_euler.pitch));
    row.push_back(format_real(r.vehicle_euler.roll));
    table.add_row(std::move(row));
  }
  write_metadata_comments(out, meta);
  table.write(out);
  return kExitOk;
}

// ---- simulate / sweep --------------------------------------------------------

std::vector<std::string> stats_cells(const TrialStatistics& s) {
  std::vector<std::string> c{std::to_string(s.trials), std::to_string(s.failures)};
  for (int i = 0; i < 3; ++i) c.push_back(format_real(s.mean_t(i)));
  for (int i = 0; i < 3; ++i) c.push_back(format_real(s.var_t(i)));
  return c;
}

json stats_json(std::string_view method, const TrialStatistics& s, double snr_db,
                std::uint64_t seed) {
  return {{"method", std::string(method)},
          {"trials", s.trials},
          {"failures", s.failures},
          {"mean_t", {s.mean_t.x(), s.mean_t.y(), s.mean_t.z()}},
          {"var_t", {s.var_t.x(), s.var_t.y(), s.var_t.z()}},
          {"snr_db", std::isinf(snr_db) ? json("inf") : json(snr_db)},
          {"seed", seed}};
}

std::string snr_cell(double snr_db) { return std::isinf(snr_db) ? "inf" : format_real(snr_db); }

int cmd_simulate(const GlobalOptions& g, const std::string& path, std::ostream& out) {
  const ScenarioFile f = load_scenario(path);
  Scenario sc = f.to_scenario();
  sc.seed = effective_seed(g, f);
  const auto [p4p, refined] = monte_carlo_paired(sc);
  const json meta = metadata("simulate", sc.seed);

  if (g.fmt() == Format::kJson) {
    out << json{{"metadata", meta},
                {"rows",
                 {stats_json("p4p", p4p, sc.snr_db, sc.seed),
                  stats_json("refined", refined, sc.snr_db, sc.seed)}}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  CsvTable table({"method", "trials", "failures", "mean_t1", "mean_t2", "mean_t3", "var_t1",
                  "var_t2", "var_t3", "snr_db", "seed"});
  for (const auto& [name, s] : {std::pair{"p4p", p4p}, std::pair{"refined", refined}}) {
    std::vector<std::string> row{name};
    for (auto& c : stats_cells(s)) row.push_back(std::move(c));
    row.push_back(snr_cell(sc.snr_db));
    row.push_back(std::to_string(sc.seed));
    table.add_row(std::move(row));
  }
  write_metadata_comments(out, meta);
  table.write(out);
  return kExitOk;
}

int cmd_sweep(const GlobalOptions& g, const std::string& path,
              const std::optional<std::string>& snr_spec, std::ostream& out) {
  const ScenarioFile f = load_scenario(path);
  const std::vector<double> snrs = snr_spec ? parse_snr_list(*snr_spec) : f.sweep_snr_db;
  if (snrs.empty()) throw UsageError("SNR list is empty; pass --snr-list or add sweep.snr_db");

  Scenario sc = f.to_scenario();
  sc.seed = effective_seed(g, f);
  const SweepResult result = snr_sweep(sc, snrs);
  const json meta = metadata("sweep", sc.seed);

  if (g.fmt() == Format::kJson) {
    json rows = json::array();
    for (const auto& r : result.rows) {
      rows.push_back(stats_json("p4p", r.p4p, r.snr_db, sc.seed));
      rows.push_back(stats_json("refined", r.refined, r.snr_db, sc.seed));
    }
    out << json{{"metadata", meta}, {"rows", rows}}.dump(2) << '\n';
    return kExitOk;
  }
  CsvTable table({"snr_db", "method", "trials", "failures", "mean_t1", "mean_t2", "mean_t3",
                  "var_t1", "var_t2", "var_t3", "seed"});
  for (const auto& r : result.rows) {
    for (const auto& [name, s] : {std::pair{"p4p", r.p4p}, std::pair{"refined", r.refined}}) {
      std::vector<std::string> row{snr_cell(r.snr_db), name};
      for (auto& c : stats_cells(s)) row.push_back(std::move(c));
      row.push_back(std::to_string(sc.seed));
      table.add_row(std::move(row));
    }
  }
  write_metadata_comments(out, meta);
  table.write(out);
  return kExitOk;
}

// ---- euler -------------------------------------------------------------------

int cmd_euler(const GlobalOptions& g, const std::vector<double>& matrix,
              const std::vector<double>& angles, double threshold, std::ostream& out) {
  const GimbalConfig gimbal{threshold};
  gimbal.validate();
  if (matrix.empty() == angles.empty()) {
    throw UsageError("pass exactly one of --matrix or --angles");
  }

  if (!angles.empty()) {
    const RotationMatrix r = rotation_from_euler({angles[0], angles[1], angles[2]});
    if (g.fmt() == Format::kJson) {
      json rot = json::array();
      for (int i = 0; i < 9; ++i) rot.push_back(r.matrix()(i / 3, i % 3));
      out << json{{"rotation", rot}}.dump(2) << '\n';
      return kExitOk;
    }
    CsvTable table({"r11", "r12", "r13", "r21", "r22", "r23", "r31", "r32", "r33"});
    std::vector<std::string> row;
    for (int i = 0; i < 9; ++i) row.push_back(format_real(r.matrix()(i / 3, i % 3)));
    table.add_row(std::move(row));
    table.write(out);
    return kExitOk;
  }

  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = matrix[static_cast<std::size_t>(i)];
  const EulerAngles e = euler_from_rotation(rotation_from_input(m), gimbal);
  if (g.fmt() == Format::kJson) {
    out << json{{"heading", e.heading}, {"pitch", e.pitch}, {"roll", e.roll}}.dump(2) << '\n';
    return kExitOk;
  }
  CsvTable table({"heading", "pitch", "roll"});
  table.add_row({format_real(e.heading), format_real(e.pitch), format_real(e.roll)});
  table.write(out);
  return kExitOk;
}

bool is_input_error(ErrorCode c) {
  return c == ErrorCode::kInvalidArgument || c == ErrorCode::kInvalidCount;
}

}  // namespace

std::string format_real(double v) { return fmt::format("{:.17g}", v + 0.0); }  // -0 -> 0

std::vector<double> parse_snr_list(std::string_view spec) {
  auto to_double = [](std::string_view s) {
    const std::string str(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(str, &used);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad number '{}' in SNR list", str));
    }
    if (used != str.size() || !std::isfinite(v)) {
      throw UsageError(fmt::format("bad number '{}' in SNR list", str));
    }
    return v;
  };

  if (spec.empty()) throw UsageError("SNR list is empty");
  std::vector<double> out;
  if (spec.find(':') != std::string_view::npos) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = spec.find(':', start);
      parts.push_back(to_double(spec.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw UsageError("SNR range must be start:stop:step with step > 0 and stop >= start");
    }
    const double first = parts[0], last = parts[1], step = parts[2];
    const auto count = static_cast<long>(std::floor((last - first) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(first + static_cast<double>(i) * step);
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = spec.find(',', start);
    out.push_back(to_double(spec.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planar fiducial pose estimation: P4P, SE(3) refinement, attitude, Monte Carlo",
               std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--output,-o", g.output, "Write results to this file instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", g.seed, "Override the scenario's noise seed");

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Estimate the pose for one scenario");
  solve->add_option("scenario", solve_opts.scenario, "Scenario file")->required();
  solve->add_flag("--synthesize", solve_opts.synthesize,
                  "Generate observations from the scenario pose");
  solve->add_option("--snr-db", solve_opts.snr_db, "Add white Gaussian pixel noise (with --synthesize)");
  solve->add_flag("--refine", solve_opts.refine, "Refine the P4P pose on SE(3)");
  solve->add_option("--threshold", solve_opts.threshold, "Gimbal-lock threshold on |r32|");

  std::string simulate_path;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo statistics of P4P vs refined t");
  simulate->add_option("scenario", simulate_path, "Scenario file")->required();

  std::string sweep_path;
  std::optional<std::string> snr_spec;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo statistics over a list of SNRs");
  sweep->add_option("scenario", sweep_path, "Scenario file")->required();
  sweep->add_option("--snr-list", snr_spec, "start:stop:step or comma-separated dB values");

  std::vector<double> matrix, angles;
  double threshold = GimbalConfig{}.threshold;
  auto* euler = app.add_subcommand("euler", "Convert between rotation matrix and z-x-y angles");
  auto* matrix_opt = euler->add_option("--matrix", matrix, "r11 r12 ... r33 (row-major)")
                         ->expected(9);
  auto* angles_opt = euler->add_option("--angles", angles, "heading pitch roll (radians)")
                         ->expected(3);
  matrix_opt->excludes(angles_opt);
  euler->add_option("--threshold", threshold, "Gimbal-lock threshold on |r32|");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream cli_out, cli_err;
    const int code = app.exit(e, cli_out, cli_err);
    out << cli_out.str();
    err << cli_err.str();
    return code == 0 ? kExitOk : kExitInput;
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!g.output.empty()) {
    file.open(g.output, std::ios::binary);
    if (!file) {
      err << "error: cannot open output file '" << g.output << "'\n";
      return kExitInput;
    }
    sink = &file;
  }

  try {
    if (*solve) return cmd_solve(g, solve_opts, *sink);
    if (*simulate) return cmd_simulate(g, simulate_path, *sink);
    if (*sweep) return cmd_sweep(g, sweep_path, snr_spec, *sink);
    if (*euler) return cmd_euler(g, matrix, angles, threshold, *sink);
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const PoseError& e) {
    err << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitInput : kExitSolver;
  }
  return kExitInput;
}

}  // namespace p4p::cli
