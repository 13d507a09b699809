#include "p4p/simulation.hpp"

#include <cmath>
#include <optional>

#include <fmt/core.h>

#include "p4p/error.hpp"

namespace p4p {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Welford accumulator over t in trial order.
class TranslationAccumulator {
 public:
  void add(const Vec3& t) {
    ++n_;
    const Vec3 delta = t - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta.cwiseProduct(t - mean_);
  }

  TrialStatistics finish(int trials) const {
    TrialStatistics s;
    s.trials = trials;
    s.failures = trials - n_;
    if (n_ == 0) {
      throw PoseError(ErrorCode::kAllTrialsFailed, fmt::format("all {} trials failed", trials));
    }
    s.mean_t = mean_;
    s.var_t = n_ > 1 ? Vec3(m2_ / static_cast<double>(n_ - 1)) : Vec3::Zero();
    return s;
  }

 private:
  int n_ = 0;
  Vec3 mean_ = Vec3::Zero();
  Vec3 m2_ = Vec3::Zero();
};

struct TrialResult {
  std::optional<Vec3> p4p;
  std::optional<Vec3> refined;
};

TrialResult run_trial(const Scenario& sc, const ObservationSet& clean, std::uint64_t trial,
                      bool want_refined) {
  auto rng = trial_rng(sc.seed, trial);
  const ObservationSet noisy = add_awgn(clean, sc.snr_db, rng);

  TrialResult out;
  try {
    const Pose initial = solve_p4p(sc.target, noisy, sc.intrinsics);
    out.p4p = initial.translation;
    if (want_refined) {
      out.refined = refine(initial, sc.target, noisy, sc.intrinsics, sc.refine_options).pose.translation;
    }
  } catch (const PoseError&) {
    // counted as a failure by whichever method did not produce a value
  }
  return out;
}

}  // namespace

CameraIntrinsics reference_intrinsics() { return CameraIntrinsics(kReferenceFocal, kReferenceFocal); }

void Scenario::validate() const {
  if (trials < 1) {
    throw PoseError(ErrorCode::kInvalidArgument, "trials must be at least 1");
  }
  if (target.size() < 4) {
    throw PoseError(ErrorCode::kInvalidCount,
                    fmt::format("need at least 4 points, got {}", target.size()));
  }
  if (std::isnan(snr_db)) {
    throw PoseError(ErrorCode::kInvalidArgument, "snr_db is NaN");
  }
  refine_options.validate();
  for (std::size_t i = 0; i < target.size(); ++i) {
    project(intrinsics, true_pose, target.point3(i));  // throws if not visible
  }
}

std::string_view to_string(Method m) { return m == Method::kP4P ? "p4p" : "refined"; }

PlanarTarget make_feature_set(int count, double half_side) {
  if (count != 4 && count != 8) {
    throw PoseError(ErrorCode::kInvalidCount, fmt::format("feature count must be 4 or 8, got {}", count));
  }
  if (!(half_side > 0.0) || !std::isfinite(half_side)) {
    throw PoseError(ErrorCode::kInvalidArgument, "half_side must be positive");
  }
  const double h = half_side;
  PlanarTarget t;
  t.points = {{-h, -h}, {-h, h}, {h, h}, {h, -h}};
  if (count == 8) {
    t.points.insert(t.points.end(), {{-h, 0.0}, {0.0, h}, {h, 0.0}, {0.0, -h}});
  }
  return t;
}

ObservationSet synth_observations(const Scenario& sc) {
  ObservationSet obs;
  obs.pixels.reserve(sc.target.size());
  for (std::size_t i = 0; i < sc.target.size(); ++i) {
    obs.pixels.push_back(project(sc.intrinsics, sc.true_pose, sc.target.point3(i)).pixel);
  }
  return obs;
}

double pixel_rms(const ObservationSet& obs) {
  if (obs.size() == 0) return 0.0;
  double sum = 0.0;
  for (const Vec2& p : obs.pixels) sum += p.squaredNorm();
  return std::sqrt(sum / (2.0 * static_cast<double>(obs.size())));
}

ObservationSet add_awgn(const ObservationSet& obs, double snr_db, std::mt19937_64& rng) {
  if (std::isinf(snr_db) && snr_db > 0.0) return obs;
  if (!std::isfinite(snr_db)) {
    throw PoseError(ErrorCode::kInvalidArgument, "snr_db must be finite or +inf");
  }
  const double sigma = pixel_rms(obs) * std::pow(10.0, -snr_db / 20.0);
  std::normal_distribution<double> noise(0.0, sigma);
  ObservationSet out = obs;
  for (Vec2& p : out.pixels) {
    p.x() += noise(rng);
    p.y() += noise(rng);
  }
  return out;
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ trial));
}

TrialStatistics monte_carlo(const Scenario& sc, Method method) {
  sc.validate();
  const ObservationSet clean = synth_observations(sc);
  const bool refined = method == Method::kRefined;
  TranslationAccumulator acc;
  for (int i = 0; i < sc.trials; ++i) {
    const TrialResult r = run_trial(sc, clean, static_cast<std::uint64_t>(i), refined);
    const auto& t = refined ? r.refined : r.p4p;
    if (t) acc.add(*t);
  }
  return acc.finish(sc.trials);
}

std::pair<TrialStatistics, TrialStatistics> monte_carlo_paired(const Scenario& sc) {
  sc.validate();
  const ObservationSet clean = synth_observations(sc);
  TranslationAccumulator p4p_acc, refined_acc;
  for (int i = 0; i < sc.trials; ++i) {
    const TrialResult r = run_trial(sc, clean, static_cast<std::uint64_t>(i), true);
    if (r.p4p) p4p_acc.add(*r.p4p);
    if (r.refined) refined_acc.add(*r.refined);
  }
  return {p4p_acc.finish(sc.trials), refined_acc.finish(sc.trials)};
}

SweepResult snr_sweep(const Scenario& base, const std::vector<double>& snr_list) {
  if (snr_list.empty()) {
    throw PoseError(ErrorCode::kInvalidArgument, "SNR list is empty");
  }
  for (std::size_t i = 1; i < snr_list.size(); ++i) {
    if (!(snr_list[i] > snr_list[i - 1])) {
      throw PoseError(ErrorCode::kInvalidArgument, "SNR list must be strictly increasing");
    }
  }
  SweepResult result;
  for (double snr : snr_list) {
    Scenario sc = base;
    sc.snr_db = snr;
    auto [p4p, refined] = monte_carlo_paired(sc);
    result.rows.push_back({snr, p4p, refined});
  }
  return result;
}

FeatureCountComparison feature_count_comparison(double half_side, double t3, double snr_db,
                                                int trials, std::uint64_t seed) {
  Scenario sc;
  sc.true_pose = Pose{RotationMatrix::identity(), Vec3(0.05, 0.05, t3)};
  sc.snr_db = snr_db;
  sc.trials = trials;
  sc.seed = seed;

  FeatureCountComparison out;
  sc.target = make_feature_set(4, half_side);
  out.four_point = monte_carlo(sc, Method::kRefined);
  sc.target = make_feature_set(8, half_side);
  out.eight_point = monte_carlo(sc, Method::kRefined);
  return out;
}

}  // namespace p4p
