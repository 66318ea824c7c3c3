#include "lcrisk/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lcrisk {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double kTailMass = 1e-12;

}  // namespace

SubjectStream SubjectStream::for_subject(std::uint64_t seed, std::uint64_t index) noexcept {
  return SubjectStream(mix64(mix64(seed) ^ (index * kGolden + 0x632be59bd9b4e019ULL)));
}

SubjectStream::result_type SubjectStream::operator()() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

double SubjectStream::uniform() noexcept {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

LatentCountSampler::LatentCountSampler(ModelKind kind, double theta) : kind_(kind), theta_(theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::domain_error("sample_latent_count: theta must be positive and finite");
  }
  double total = 0.0;
  for (std::int64_t m = first(); total < 1.0 - kTailMass; ++m) {
    const double p = std::exp(log_pmf(m));
    total += p;
    cumulative_.push_back(total);
    // Past the mode a vanishing term means the sum has saturated below 1 - 1e-12 by rounding.
    if (static_cast<double>(m) > theta && p < 1e-18) break;
  }
}

double LatentCountSampler::log_pmf(std::int64_t m) const {
  return kind_ == ModelKind::ZeroTruncated ? zt_poisson_log_pmf(m, theta_) : poisson_log_pmf(m, theta_);
}

std::int64_t LatentCountSampler::operator()(SubjectStream& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it != cumulative_.end()) return first() + static_cast<std::int64_t>(it - cumulative_.begin());
  // Beyond the table: keep accumulating the pmf.
  std::int64_t m = first() + static_cast<std::int64_t>(cumulative_.size());
  double total = cumulative_.back();
  for (;; ++m) {
    const double p = std::exp(log_pmf(m));
    total += p;
    if (total >= u || p == 0.0) return m;
  }
}

std::int64_t sample_latent_count(ModelKind kind, double theta, SubjectStream& rng) {
  return LatentCountSampler(kind, theta)(rng);
}

double sample_weibull(const WeibullParams& p, SubjectStream& rng) {
  return p.scale() * std::pow(-std::log(rng.uniform()), 1.0 / p.shape());
}

void validate(const SimConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (!(cfg.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be positive");
  if (cfg.model.kind() == ModelKind::PromotionTime && std::isinf(cfg.horizon)) {
    throw std::invalid_argument("simulate: promotion-time cohorts need a finite horizon (cured subjects never fail)");
  }
  if (cfg.model.kind() == ModelKind::PromotionTime && !(cfg.model.theta() > 0.0)) {
    throw std::invalid_argument("simulate: theta must be positive");
  }
}

std::vector<EventRecord> simulate_cohort(const SimConfig& cfg) {
  validate(cfg);
  const LatentCountSampler counts(cfg.model.kind(), cfg.model.theta());
  std::vector<EventRecord> out;
  out.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    SubjectStream rng = SubjectStream::for_subject(cfg.seed, i);
    const std::int64_t m = counts(rng);
    double y = std::numeric_limits<double>::infinity();
    for (std::int64_t c = 0; c < m; ++c) y = std::min(y, sample_weibull(cfg.model.weibull(), rng));
    if (y > cfg.horizon) {
      out.push_back({cfg.horizon, 0, cfg.cohort});
    } else {
      out.push_back({y, 1, cfg.cohort});
    }
  }
  return out;
}

}  // namespace lcrisk
