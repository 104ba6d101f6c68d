#ifndef LFLOC_FILTER_HPP
#define LFLOC_FILTER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "lfloc/geometry.hpp"
#include "lfloc/map.hpp"
#include "lfloc/observation.hpp"

namespace lfloc {

struct Particle {
  Pose pose;
  double weight = 0.0;

  friend bool operator==(const Particle&, const Particle&) = default;
};

/// Multiplicative odometry noise: sigma_linear scales the travelled distance,
/// sigma_angular scales the heading change.
struct MotionNoise {
  double sigma_linear = 0.05;
  double sigma_angular = 0.05;
};

/// Change between two consecutive odometry poses, expressed in the earlier one.
struct OdomDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;

  friend bool operator==(const OdomDelta&, const OdomDelta&) = default;
};

struct InitSigmas {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// N weighted pose hypotheses plus the key of their random streams.
/// Every random draw comes from a stream keyed by (seed, epoch, index), and
/// each random-consuming operation advances the epoch.
class ParticleSet {
 public:
  ParticleSet(std::vector<Particle> particles, std::uint64_t seed, std::uint64_t epoch = 0);

  [[nodiscard]] const std::vector<Particle>& particles() const { return particles_; }
  [[nodiscard]] std::size_t size() const { return particles_.size(); }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t epoch() const { return epoch_; }
  [[nodiscard]] std::vector<double> weights() const;
  /// 1 / sum(w^2) of the normalized weights.
  [[nodiscard]] double effective_sample_size() const;

  friend bool operator==(const ParticleSet&, const ParticleSet&) = default;

 private:
  std::vector<Particle> particles_;
  std::uint64_t seed_;
  std::uint64_t epoch_;
};

ParticleSet init_gaussian(const Pose& pose0, const InitSigmas& sigmas, std::size_t n,
                          std::uint64_t seed);

/// Positions uniform over drivable pixels, headings uniform in (-pi, pi].
ParticleSet init_uniform(const ProbMap& pmap, std::size_t n, std::uint64_t seed);

/// theta += dtheta (1 + delta); d = s (1 + eta); x += d cos(theta); y += d sin(theta).
/// s is the odometry step length, negative when the vehicle moved backwards.
ParticleSet predict(const ParticleSet& set, const OdomDelta& delta, const MotionNoise& noise,
                    unsigned threads = 1);

struct WeighTimings {
  double transform_ms = 0.0;
  double shift_ms = 0.0;
  double angular_ms = 0.0;
  double other_ms = 0.0;
};

struct WeighResult {
  ParticleSet set;
  bool degenerate = false;  // every raw weight was zero; weights reset to uniform
  WeighTimings timings;
};

/// Scores every particle with the observation model gated by the occupancy
/// channel, then normalizes the weights.
WeighResult weigh(const ParticleSet& set, const PreparedMeasurement& z, const ProbMap& pmap,
                  const ObsParams& params, ModelVariant variant = ModelVariant::combined,
                  unsigned threads = 1);

/// Indices picked by the comb u0 + j/N against the cumulative weights.
std::vector<std::size_t> systematic_resample_indices(std::span<const double> weights, double u0);

/// Draws u0 ~ U[0, 1/N) from the set's stream; copies get weight 1/N.
ParticleSet systematic_resample(const ParticleSet& set);

struct Estimate {
  Pose pose;
  bool fallback = false;  // circular mean undefined; heading of the best particle used
};

/// Weighted mean position and weighted circular-mean heading.
Estimate estimate(const ParticleSet& set);

struct FilterConfig {
  std::size_t particles = 1000;
  MotionNoise motion;
  ObsParams obs;
  ModelVariant variant = ModelVariant::combined;
  bool ess_gating = false;  // resample only when ESS < N/2
  unsigned threads = 1;
};

struct StepTimings {
  double transform_ms = 0.0;
  double shift_ms = 0.0;
  double angular_ms = 0.0;
  double resample_ms = 0.0;
  double total_ms = 0.0;
};

struct StepResult {
  ParticleSet set;
  Pose estimate;
  StepTimings timings;
  bool degenerate = false;
  bool estimate_fallback = false;
  bool resampled = false;
};

/// predict -> weigh -> estimate -> resample.
StepResult step(const ParticleSet& set, const OdomDelta& delta, const PreparedMeasurement& z,
                const ProbMap& pmap, const FilterConfig& config);

}  // namespace lfloc

#endif  // LFLOC_FILTER_HPP
