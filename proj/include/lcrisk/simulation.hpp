#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lcrisk/inference.hpp"
#include "lcrisk/models.hpp"

namespace lcrisk {

/// SplitMix64 stream. Satisfies UniformRandomBitGenerator.
class SubjectStream {
 public:
  using result_type = std::uint64_t;

  explicit SubjectStream(std::uint64_t state) noexcept : state_(state) {}

  /// Independent stream for subject `index` of a run seeded with `seed`.
  static SubjectStream for_subject(std::uint64_t seed, std::uint64_t index) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform() noexcept;

 private:
  std::uint64_t state_;
};

/// Inverse-CDF sampler for the latent number of causes, Poisson(theta) or
/// zero-truncated Poisson(theta). The cumulative table stops once it holds
/// 1 - 1e-12 of the mass; draws past it continue the recurrence on the fly.
class LatentCountSampler {
 public:
  LatentCountSampler(ModelKind kind, double theta);

  std::int64_t operator()(SubjectStream& rng) const;

  ModelKind kind() const noexcept { return kind_; }
  double theta() const noexcept { return theta_; }

 private:
  std::int64_t first() const noexcept { return kind_ == ModelKind::ZeroTruncated ? 1 : 0; }
  double log_pmf(std::int64_t m) const;

  ModelKind kind_;
  double theta_;
  std::vector<double> cumulative_;
};

std::int64_t sample_latent_count(ModelKind kind, double theta, SubjectStream& rng);

/// Weibull draw by inversion: scale * (-ln U)^(1/shape).
double sample_weibull(const WeibullParams& p, SubjectStream& rng);

struct SimConfig {
  ModelSpec model;
  std::size_t n = 1;
  double horizon = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::string cohort = "sim";
};

void validate(const SimConfig& cfg);

/// One record per subject: draw M, then the minimum of M Weibull times; cured
/// subjects (M = 0) and times beyond the horizon are censored at the horizon.
/// Subject i only reads the stream for (seed, i), so the output does not depend
/// on how subjects are scheduled.
std::vector<EventRecord> simulate_cohort(const SimConfig& cfg);

}  // namespace lcrisk
