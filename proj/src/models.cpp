#include "lcrisk/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lcrisk {

namespace {

void require_kind(const ModelSpec& m, ModelKind expected, const char* who) {
  if (m.kind() != expected) {
    throw std::invalid_argument(std::string(who) + ": expected a " + std::string(to_string(expected)) +
                                " model, got " + std::string(to_string(m.kind())));
  }
}

void require_time(double t, const char* who) {
  if (!(t >= 0.0)) throw std::domain_error(std::string(who) + ": time must be non-negative");
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::ZeroTruncated:
      return "zt";
    case ModelKind::PromotionTime:
      return "ptm";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "zt" || text == "zero-truncated") return ModelKind::ZeroTruncated;
  if (text == "ptm" || text == "promotion-time") return ModelKind::PromotionTime;
  throw std::invalid_argument("unknown model kind '" + std::string(text) + "' (expected zt or ptm)");
}

ModelSpec::ModelSpec(ModelKind kind, LatentCountParams theta, WeibullParams weibull)
    : kind_(kind), theta_(theta), weibull_(weibull) {
  if (kind_ == ModelKind::ZeroTruncated && !(theta_.theta() > 0.0)) {
    throw std::invalid_argument("ModelSpec: the zero-truncated model requires theta > 0");
  }
}

ModelSpec::ModelSpec(ModelKind kind, double theta, double shape, double scale)
    : ModelSpec(kind, LatentCountParams(theta), WeibullParams(shape, scale)) {}

double ztpw_log_density(double t, const ModelSpec& m) {
  require_kind(m, ModelKind::ZeroTruncated, "ztpw_density");
  require_time(t, "ztpw_density");
  const double theta = m.theta();
  return std::log(theta) + theta * weibull_survival(t, m.weibull()) + weibull_log_pdf(t, m.weibull()) -
         log_expm1(theta);
}

double ztpw_density(double t, const ModelSpec& m) { return std::exp(ztpw_log_density(t, m)); }

double ztpw_survival(double t, const ModelSpec& m) {
  require_kind(m, ModelKind::ZeroTruncated, "ztpw_survival");
  require_time(t, "ztpw_survival");
  const double theta = m.theta();
  const double s = weibull_survival(t, m.weibull());
  // (e^{theta s} - 1) / (e^theta - 1), factored to avoid overflow.
  return std::exp(theta * (s - 1.0)) * std::expm1(-theta * s) / std::expm1(-theta);
}

double ptm_log_density(double t, const ModelSpec& m) {
  require_kind(m, ModelKind::PromotionTime, "ptm_density");
  require_time(t, "ptm_density");
  const double theta = m.theta();
  if (theta == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(theta) + weibull_log_pdf(t, m.weibull()) - theta * weibull_cdf(t, m.weibull());
}

double ptm_density(double t, const ModelSpec& m) { return std::exp(ptm_log_density(t, m)); }

double ptm_log_survival(double t, const ModelSpec& m) {
  require_kind(m, ModelKind::PromotionTime, "ptm_survival");
  require_time(t, "ptm_survival");
  return -m.theta() * weibull_cdf(t, m.weibull());
}

double ptm_survival(double t, const ModelSpec& m) { return std::exp(ptm_log_survival(t, m)); }

double survival(double t, const ModelSpec& m) {
  return m.kind() == ModelKind::ZeroTruncated ? ztpw_survival(t, m) : ptm_survival(t, m);
}

double density(double t, const ModelSpec& m) {
  return m.kind() == ModelKind::ZeroTruncated ? ztpw_density(t, m) : ptm_density(t, m);
}

double cure_fraction(const ModelSpec& m) {
  require_kind(m, ModelKind::PromotionTime, "cure_fraction");
  return std::exp(-m.theta());
}

double elgd_at_horizon(const ModelSpec& m, double horizon) {
  require_kind(m, ModelKind::PromotionTime, "elgd_at_horizon");
  if (!(horizon > 0.0)) throw std::domain_error("elgd_at_horizon: horizon must be positive");
  if (std::isinf(horizon)) return cure_fraction(m);
  return ptm_survival(horizon, m);
}

}  // namespace lcrisk
