#pragma once

#include <cstdint>

namespace lcrisk {

/// Weibull latency distribution in scale form, F(t) = 1 - exp(-(t/scale)^shape).
///
/// Rate-form parameters (exp(-(rate*t)^shape)) convert with scale = 1 / rate.
class WeibullParams {
 public:
  WeibullParams(double shape, double scale);

  static WeibullParams from_rate(double shape, double rate);

  double shape() const noexcept { return shape_; }
  double scale() const noexcept { return scale_; }

  friend bool operator==(const WeibullParams&, const WeibullParams&) = default;

 private:
  double shape_;
  double scale_;
};

/// Intensity of the latent number of competing causes.
///
/// theta >= 0. theta = 0 means everyone is cured under the promotion-time model;
/// the zero-truncated model requires theta > 0.
class LatentCountParams {
 public:
  explicit LatentCountParams(double theta);

  double theta() const noexcept { return theta_; }

  friend bool operator==(const LatentCountParams&, const LatentCountParams&) = default;

 private:
  double theta_;
};

double weibull_pdf(double t, const WeibullParams& p);
double weibull_log_pdf(double t, const WeibullParams& p);
double weibull_cdf(double t, const WeibullParams& p);
double weibull_survival(double t, const WeibullParams& p);

double poisson_log_pmf(std::int64_t m, double theta);
double poisson_pmf(std::int64_t m, double theta);

/// P(M = m | M >= 1) for M ~ Poisson(theta); m = 0 is a domain error.
double zt_poisson_log_pmf(std::int64_t m, double theta);
double zt_poisson_pmf(std::int64_t m, double theta);

/// E[M | M >= 1] = theta e^theta / (e^theta - 1). Always > 1, tends to 1 as theta -> 0.
double zt_poisson_mean(double theta);

/// ln(e^theta - 1) without overflow or cancellation.
double log_expm1(double theta);

}  // namespace lcrisk
