#include "lfloc/filter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "lfloc/random.hpp"

namespace lfloc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Runs fn(begin, end) over [0, n) split into contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

constexpr std::uint64_t kResampleSalt = 0x5245534d504c45ULL;

}  // namespace

ParticleSet::ParticleSet(std::vector<Particle> particles, std::uint64_t seed, std::uint64_t epoch)
    : particles_(std::move(particles)), seed_(seed), epoch_(epoch) {
  if (particles_.empty()) throw std::invalid_argument("ParticleSet: needs at least one particle");
  for (const Particle& p : particles_) {
    if (!std::isfinite(p.weight) || p.weight < 0.0) {
      throw std::invalid_argument("ParticleSet: weights must be finite and non-negative");
    }
  }
}

std::vector<double> ParticleSet::weights() const {
  std::vector<double> w;
  w.reserve(particles_.size());
  for (const Particle& p : particles_) w.push_back(p.weight);
  return w;
}

double ParticleSet::effective_sample_size() const {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const Particle& p : particles_) {
    sum += p.weight;
    sum_sq += p.weight * p.weight;
  }
  if (sum_sq == 0.0) return 0.0;
  return (sum * sum) / sum_sq;
}

ParticleSet init_gaussian(const Pose& pose0, const InitSigmas& sigmas, std::size_t n,
                          std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("init_gaussian: N must be >= 1");
  std::vector<Particle> particles;
  particles.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng(stream_seed(seed, 0, i, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double x = pose0.x() + sigmas.x * gauss(rng);
    const double y = pose0.y() + sigmas.y * gauss(rng);
    const double th = pose0.theta() + sigmas.theta * gauss(rng);
    particles.push_back({Pose(x, y, th), w});
  }
  return {std::move(particles), seed, 1};
}

ParticleSet init_uniform(const ProbMap& pmap, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("init_uniform: N must be >= 1");
  const Grid<float>& occ = pmap.channel(Channel::occupancy);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i] != 0.0F) free.push_back(i);
  }
  if (free.empty()) throw std::invalid_argument("init_uniform: occupancy channel has no free pixel");
  const MapMeta& meta = pmap.meta();
  std::vector<Particle> particles;
  particles.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng(stream_seed(seed, 0, i, 1));
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    const std::size_t idx = free[pick(rng)];
    const auto col = static_cast<int>(idx % meta.width);
    const auto row = static_cast<int>(idx / meta.width);
    const Point2 center = meta.pixel_center({col, row});
    // Stay strictly inside the pixel so nearest-pixel lookup maps back to it.
    const double jx = (uniform01(rng) - 0.5) * meta.resolution * 0.999;
    const double jy = (uniform01(rng) - 0.5) * meta.resolution * 0.999;
    const double th = std::numbers::pi - 2.0 * std::numbers::pi * uniform01(rng);
    particles.push_back({Pose(center.x + jx, center.y + jy, th), w});
  }
  return {std::move(particles), seed, 1};
}

ParticleSet predict(const ParticleSet& set, const OdomDelta& delta, const MotionNoise& noise,
                    unsigned threads) {
  std::vector<Particle> out = set.particles();
  const double step_length = std::hypot(delta.dx, delta.dy);
  const double s = delta.dx < 0.0 ? -step_length : step_length;
  if (s != 0.0 || delta.dtheta != 0.0) {
    const std::uint64_t seed = set.seed();
    const std::uint64_t epoch = set.epoch();
    parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t n = begin; n < end; ++n) {
        SplitMix64 rng(stream_seed(seed, epoch, n, 0));
        std::normal_distribution<double> gauss(0.0, 1.0);
        const double angular_noise = noise.sigma_angular * gauss(rng);
        const double linear_noise = noise.sigma_linear * gauss(rng);
        const Pose& p = out[n].pose;
        const double theta = p.theta() + delta.dtheta + delta.dtheta * angular_noise;
        const double d = s + s * linear_noise;
        out[n].pose = Pose(p.x() + d * std::cos(theta), p.y() + d * std::sin(theta), theta);
      }
    });
  }
  return {std::move(out), set.seed(), set.epoch() + 1};
}

WeighResult weigh(const ParticleSet& set, const PreparedMeasurement& z, const ProbMap& pmap,
                  const ObsParams& params, ModelVariant variant, unsigned threads) {
  const auto& in = set.particles();
  const std::size_t n = in.size();
  const std::size_t pts = z.points().size();
  const std::size_t cams = z.cameras().size();
  WeighTimings timings;

  std::vector<Point2> map_points(n * pts);
  std::vector<CameraSums> sums(n * cams);

  auto t0 = Clock::now();
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      transform_points(z.points(), in[i].pose, std::span(map_points).subspan(i * pts, pts));
    }
  });
  timings.transform_ms = ms_since(t0);

  t0 = Clock::now();
  if (variant != ModelVariant::angular) {
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        accumulate_shift(z, std::span(map_points).subspan(i * pts, pts), pmap,
                         std::span(sums).subspan(i * cams, cams));
      }
    });
  }
  timings.shift_ms = ms_since(t0);

  t0 = Clock::now();
  if (variant != ModelVariant::shift) {
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        accumulate_angular(z, std::span(map_points).subspan(i * pts, pts), pmap, params,
                           std::span(sums).subspan(i * cams, cams));
      }
    });
  }
  timings.angular_ms = ms_since(t0);

  t0 = Clock::now();
  // Normalizing relative to the best log-likelihood keeps exp() in range; the
  // common factor cancels in the normalization.
  std::vector<double> log_w(n, -std::numeric_limits<double>::infinity());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!pmap.drivable_at(in[i].pose.position()) || in[i].weight == 0.0) continue;
    const double lw = fused_log_likelihood(std::span(sums).subspan(i * cams, cams), variant) +
                      std::log(in[i].weight);
    log_w[i] = lw;
    best = std::max(best, lw);
  }
  std::vector<Particle> out = in;
  double total = 0.0;
  if (std::isfinite(best)) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i].weight = std::exp(log_w[i] - best);
      total += out[i].weight;
    }
  }
  const bool degenerate = !(total > 0.0);
  for (Particle& p : out) p.weight = degenerate ? 1.0 / static_cast<double>(n) : p.weight / total;
  timings.other_ms = ms_since(t0);

  return {ParticleSet(std::move(out), set.seed(), set.epoch()), degenerate, timings};
}

std::vector<std::size_t> systematic_resample_indices(std::span<const double> weights, double u0) {
  const std::size_t n = weights.size();
  if (n == 0) throw std::invalid_argument("systematic_resample: empty weight vector");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument("systematic_resample: weights are not normalized (sum = " +
                                std::to_string(total) + ")");
  }
  const double step = 1.0 / static_cast<double>(n);
  if (!(u0 >= 0.0 && u0 < step)) throw std::invalid_argument("systematic_resample: u0 outside [0, 1/N)");
  std::vector<std::size_t> picks;
  picks.reserve(n);
  std::size_t i = 0;
  double cumulative = weights[0];
  for (std::size_t j = 0; j < n; ++j) {
    const double u = u0 + static_cast<double>(j) * step;
    while (u >= cumulative && i + 1 < n) {
      ++i;
      cumulative += weights[i];
    }
    picks.push_back(i);
  }
  return picks;
}

ParticleSet systematic_resample(const ParticleSet& set) {
  const std::size_t n = set.size();
  SplitMix64 rng(stream_seed(set.seed(), set.epoch(), kResampleSalt, 0));
  const double u0 = uniform01(rng) / static_cast<double>(n);
  const auto weights = set.weights();
  const auto picks = systematic_resample_indices(weights, u0);
  std::vector<Particle> out;
  out.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t idx : picks) out.push_back({set.particles()[idx].pose, w});
  return {std::move(out), set.seed(), set.epoch() + 1};
}

Estimate estimate(const ParticleSet& set) {
  double sw = 0.0, sx = 0.0, sy = 0.0, ss = 0.0, sc = 0.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Particle& p = set.particles()[i];
    sw += p.weight;
    sx += p.weight * p.pose.x();
    sy += p.weight * p.pose.y();
    ss += p.weight * std::sin(p.pose.theta());
    sc += p.weight * std::cos(p.pose.theta());
    if (p.weight > set.particles()[best].weight) best = i;
  }
  if (!(sw > 0.0)) throw std::invalid_argument("estimate: weights sum to zero");
  const double x = sx / sw;
  const double y = sy / sw;
  if (std::hypot(ss, sc) <= 1e-12 * sw) {
    return {Pose(x, y, set.particles()[best].pose.theta()), true};
  }
  return {Pose(x, y, std::atan2(ss, sc)), false};
}

StepResult step(const ParticleSet& set, const OdomDelta& delta, const PreparedMeasurement& z,
                const ProbMap& pmap, const FilterConfig& config) {
  const auto start = Clock::now();
  ParticleSet predicted = predict(set, delta, config.motion, config.threads);
  WeighResult weighed = weigh(predicted, z, pmap, config.obs, config.variant, config.threads);
  const Estimate est = estimate(weighed.set);

  StepResult result{weighed.set, est.pose, {}, weighed.degenerate, est.fallback, false};
  const auto t0 = Clock::now();
  const bool resample =
      !config.ess_gating ||
      weighed.set.effective_sample_size() < 0.5 * static_cast<double>(weighed.set.size());
  if (resample) {
    result.set = systematic_resample(weighed.set);
    result.resampled = true;
  }
  result.timings.resample_ms = ms_since(t0);
  result.timings.transform_ms = weighed.timings.transform_ms;
  result.timings.shift_ms = weighed.timings.shift_ms;
  result.timings.angular_ms = weighed.timings.angular_ms;
  result.timings.total_ms = ms_since(start);
  return result;
}

}  // namespace lfloc
