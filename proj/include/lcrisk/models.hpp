#pragma once

#include <string_view>

#include "lcrisk/distributions.hpp"

namespace lcrisk {

enum class ModelKind {
  ZeroTruncated,  ///< every subject susceptible: M ~ ZT-Poisson(theta)
  PromotionTime,  ///< cure fraction e^-theta: M ~ Poisson(theta)
};

std::string_view to_string(ModelKind kind) noexcept;
/// Accepts "zt" / "ptm" (and the long names); throws std::invalid_argument otherwise.
ModelKind parse_model_kind(std::string_view text);

/// Full parameter vector (theta, shape, scale) of a latent competing-risk model.
/// The observed time is the minimum of M i.i.d. Weibull latent times.
class ModelSpec {
 public:
  ModelSpec(ModelKind kind, LatentCountParams theta, WeibullParams weibull);
  ModelSpec(ModelKind kind, double theta, double shape, double scale);

  ModelKind kind() const noexcept { return kind_; }
  double theta() const noexcept { return theta_.theta(); }
  const WeibullParams& weibull() const noexcept { return weibull_; }
  double shape() const noexcept { return weibull_.shape(); }
  double scale() const noexcept { return weibull_.scale(); }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  ModelKind kind_;
  LatentCountParams theta_;
  WeibullParams weibull_;
};

// Zero-truncated Poisson-Weibull.
double ztpw_density(double t, const ModelSpec& m);
double ztpw_log_density(double t, const ModelSpec& m);
double ztpw_survival(double t, const ModelSpec& m);

// Promotion-time (cure) Poisson-Weibull. The density is defective: it integrates to 1 - e^-theta.
double ptm_density(double t, const ModelSpec& m);
double ptm_log_density(double t, const ModelSpec& m);
double ptm_survival(double t, const ModelSpec& m);
double ptm_log_survival(double t, const ModelSpec& m);

/// Kind-dispatching survival and density.
double survival(double t, const ModelSpec& m);
double density(double t, const ModelSpec& m);

/// Asymptotic never-recovered share e^-theta.
double cure_fraction(const ModelSpec& m);

/// Model probability that a defaulted loan is still unrecovered at `horizon`,
/// i.e. the promotion-time survival there. Bounded below by cure_fraction.
double elgd_at_horizon(const ModelSpec& m, double horizon);

}  // namespace lcrisk
