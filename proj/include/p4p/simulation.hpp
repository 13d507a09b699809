#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "p4p/geometry.hpp"
#include "p4p/manifold_refiner.hpp"
#include "p4p/p4p_solver.hpp"

namespace p4p {

// Sentinel SNR meaning "no noise".
inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

/// Generator used for every noise draw; recorded in output metadata.
inline constexpr std::string_view kGeneratorId = "mt19937_64[splitmix64(seed,trial)]+normal";

/// Focal length (pixels) that reproduces the pixel lists of the
/// reference scenarios with a zero principal point.
inline constexpr double kReferenceFocal = 1562.5;

CameraIntrinsics reference_intrinsics();

struct Scenario {
  PlanarTarget target;
  Pose true_pose;
  CameraIntrinsics intrinsics = reference_intrinsics();
  double snr_db = kNoiselessSnr;
  int trials = 1000;
  std::uint64_t seed = 0;
  RefineOptions refine_options;

  void validate() const;
};

enum class Method { kP4P, kRefined };

std::string_view to_string(Method m);

struct TrialStatistics {
  Vec3 mean_t = Vec3::Zero();
  Vec3 var_t = Vec3::Zero();  // unbiased (n - 1) sample variance
  int trials = 0;
  int failures = 0;
};

struct SweepRow {
  double snr_db;
  TrialStatistics p4p;
  TrialStatistics refined;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Square of half-side h: 4 corners (-h,-h), (-h,h), (h,h), (h,-h), and for
/// count 8 the edge midpoints (-h,0), (0,h), (h,0), (0,-h) appended.
PlanarTarget make_feature_set(int count, double half_side);

ObservationSet synth_observations(const Scenario& scenario);

/// Root mean square over every pixel coordinate in the set.
double pixel_rms(const ObservationSet& obs);

/// Per-coordinate i.i.d. N(0, sigma^2) with sigma = rms * 10^(-snr_db / 20).
/// An infinite snr_db returns the input unchanged.
ObservationSet add_awgn(const ObservationSet& obs, double snr_db, std::mt19937_64& rng);

/// Independent, reproducible stream for one Monte Carlo trial.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

/// One method's statistics. Trials that throw are counted as failures and
/// left out; throws kAllTrialsFailed if none succeed.
TrialStatistics monte_carlo(const Scenario& scenario, Method method);

/// Both methods on identical noise realizations.
std::pair<TrialStatistics, TrialStatistics> monte_carlo_paired(const Scenario& scenario);

/// One paired Monte Carlo per SNR, in list order. The list must be nonempty
/// and strictly increasing.
SweepResult snr_sweep(const Scenario& base, const std::vector<double>& snr_list);

struct FeatureCountComparison {
  TrialStatistics four_point;
  TrialStatistics eight_point;
};

/// Refined statistics with 4 and 8 features on the same square, R = I and
/// t = (0.05, 0.05, t3).
FeatureCountComparison feature_count_comparison(double half_side, double t3, double snr_db,
                                                int trials, std::uint64_t seed);

}  // namespace p4p
