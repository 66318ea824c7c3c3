#include "lcrisk/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lcrisk {

namespace {

void require_time(double t, const char* who) {
  if (!(t >= 0.0)) {
    throw std::domain_error(std::string(who) + ": time must be non-negative, got " + std::to_string(t));
  }
}

void require_positive_theta(double theta, const char* who) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::domain_error(std::string(who) + ": theta must be positive and finite");
  }
}

}  // namespace

WeibullParams::WeibullParams(double shape, double scale) : shape_(shape), scale_(scale) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::invalid_argument("WeibullParams: shape must be positive and finite");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("WeibullParams: scale must be positive and finite");
  }
}

WeibullParams WeibullParams::from_rate(double shape, double rate) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("WeibullParams: rate must be positive");
  }
  return WeibullParams(shape, 1.0 / rate);
}

LatentCountParams::LatentCountParams(double theta) : theta_(theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("LatentCountParams: theta must be non-negative and finite");
  }
}

double weibull_log_pdf(double t, const WeibullParams& p) {
  require_time(t, "weibull_pdf");
  const double k = p.shape();
  const double lambda = p.scale();
  if (t == 0.0) {
    if (k > 1.0) return -std::numeric_limits<double>::infinity();
    if (k == 1.0) return -std::log(lambda);
    return std::numeric_limits<double>::infinity();
  }
  const double log_ratio = std::log(t / lambda);
  return std::log(k / lambda) + (k - 1.0) * log_ratio - std::exp(k * log_ratio);
}

double weibull_pdf(double t, const WeibullParams& p) { return std::exp(weibull_log_pdf(t, p)); }

double weibull_cdf(double t, const WeibullParams& p) {
  require_time(t, "weibull_cdf");
  return -std::expm1(-std::pow(t / p.scale(), p.shape()));
}

double weibull_survival(double t, const WeibullParams& p) {
  require_time(t, "weibull_survival");
  return std::exp(-std::pow(t / p.scale(), p.shape()));
}

double poisson_log_pmf(std::int64_t m, double theta) {
  if (m < 0) throw std::domain_error("poisson_pmf: count must be non-negative");
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw std::domain_error("poisson_pmf: theta must be non-negative and finite");
  }
  if (theta == 0.0) {
    return m == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const auto md = static_cast<double>(m);
  return md * std::log(theta) - theta - std::lgamma(md + 1.0);
}

double poisson_pmf(std::int64_t m, double theta) { return std::exp(poisson_log_pmf(m, theta)); }

double log_expm1(double theta) {
  // Small theta keeps the precision of expm1; large theta avoids its overflow.
  if (theta < 1.0) return std::log(std::expm1(theta));
  return theta + std::log1p(-std::exp(-theta));
}

double zt_poisson_log_pmf(std::int64_t m, double theta) {
  if (m < 1) throw std::domain_error("zt_poisson_pmf: count must be >= 1 under zero truncation");
  require_positive_theta(theta, "zt_poisson_pmf");
  const auto md = static_cast<double>(m);
  return md * std::log(theta) - std::lgamma(md + 1.0) - log_expm1(theta);
}

double zt_poisson_pmf(std::int64_t m, double theta) { return std::exp(zt_poisson_log_pmf(m, theta)); }

double zt_poisson_mean(double theta) {
  require_positive_theta(theta, "zt_poisson_mean");
  // theta / (1 - e^-theta), written so both tails stay accurate.
  return theta / -std::expm1(-theta);
}

}  // namespace lcrisk
