#include "lcrisk/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "lcrisk/nonparametric.hpp"

namespace lcrisk {

namespace {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_nonempty(std::span<const EventRecord> data, const char* who) {
  if (data.empty()) throw std::invalid_argument(std::string(who) + ": empty dataset");
}

void require_uncensored(std::span<const EventRecord> data, const char* who) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].event != 1) {
      throw std::invalid_argument(std::string(who) + ": record " + std::to_string(i) +
                                  " is censored; the zero-truncated model needs every event observed");
    }
  }
}

/// Sums per-record terms in sorted order so the total does not depend on record order.
double order_free_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  CompensatedSum acc;
  for (double x : terms) acc.add(x);
  return acc.value();
}

double record_loglik(const EventRecord& r, const ModelSpec& m) {
  if (m.kind() == ModelKind::ZeroTruncated) return ztpw_log_density(r.time, m);
  return r.event == 1 ? ptm_log_density(r.time, m) : ptm_log_survival(r.time, m);
}

double sup_norm(const ParamVector& v) {
  double out = 0.0;
  for (double x : v) out = std::max(out, std::abs(x));
  return out;
}

bool all_finite(const ParamVector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Eigen::Matrix3d to_eigen(const ParamMatrix& m) {
  Eigen::Matrix3d out;
  for (std::size_t i = 0; i < kNumParams; ++i)
    for (std::size_t j = 0; j < kNumParams; ++j) out(Eigen::Index(i), Eigen::Index(j)) = m[i][j];
  return out;
}

/// Objective and score in log coordinates phi = ln(theta, shape, scale).
struct LogProblem {
  std::span<const EventRecord> data;
  ModelKind kind;

  ParamVector natural(const ParamVector& phi) const {
    return {std::exp(phi[0]), std::exp(phi[1]), std::exp(phi[2])};
  }

  double value(const ParamVector& phi) const {
    const ParamVector x = natural(phi);
    if (!all_finite(x) || x[0] <= 0.0 || x[1] <= 0.0 || x[2] <= 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
    try {
      return loglik(data, from_vector(kind, x));
    } catch (const std::exception&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

  ParamVector gradient(const ParamVector& phi) const {
    const ParamVector x = natural(phi);
    ParamVector g = score(data, from_vector(kind, x));
    for (std::size_t j = 0; j < kNumParams; ++j) g[j] *= x[j];
    return g;
  }

  Eigen::Matrix3d hessian(const ParamVector& phi, double rel_step) const {
    Eigen::Matrix3d h;
    for (std::size_t j = 0; j < kNumParams; ++j) {
      const double step = rel_step * std::max(1.0, std::abs(phi[j]));
      ParamVector up = phi;
      ParamVector down = phi;
      up[j] += step;
      down[j] -= step;
      const ParamVector gu = gradient(up);
      const ParamVector gd = gradient(down);
      for (std::size_t i = 0; i < kNumParams; ++i) {
        h(Eigen::Index(i), Eigen::Index(j)) = (gu[i] - gd[i]) / (2.0 * step);
      }
    }
    return 0.5 * (h + h.transpose());
  }
};

/// Fills se/ci/p of `f` from f.information; throws SingularInformationError.
std::vector<WaldRow> wald_rows_from_information(const FitResult& f, const ParamVector& null_value,
                                                double confidence_level) {
  const Eigen::Matrix3d info = to_eigen(f.information);
  if (!info.allFinite()) {
    throw SingularInformationError(Param::Theta, "observed information contains non-finite entries");
  }
  // Leading principal minors in (theta, shape, scale) order; the first non-positive one
  // names the parameter whose direction is flat or ill-posed.
  for (Eigen::Index k = 1; k <= 3; ++k) {
    const double minor = info.topLeftCorner(k, k).determinant();
    if (!(minor > 0.0)) {
      const auto p = static_cast<Param>(k - 1);
      throw SingularInformationError(
          p, "observed information is not positive definite at parameter '" + std::string(param_name(p)) + "'");
    }
  }
  const Eigen::LLT<Eigen::Matrix3d> llt(info);
  if (llt.info() != Eigen::Success) {
    throw SingularInformationError(Param::Scale, "observed information is not positive definite");
  }
  const Eigen::Matrix3d cov = llt.solve(Eigen::Matrix3d::Identity());
  const ParamVector est = to_vector(f.model);

  std::vector<WaldRow> rows;
  for (Param p : {Param::Shape, Param::Scale, Param::Theta}) {
    const auto i = static_cast<std::size_t>(p);
    const double var = cov(Eigen::Index(i), Eigen::Index(i));
    if (!(var > 0.0) || !std::isfinite(var)) {
      throw SingularInformationError(
          p, "non-positive variance for parameter '" + std::string(param_name(p)) + "'");
    }
    rows.push_back(wald_row(p, est[i], std::sqrt(var), null_value[i], confidence_level));
  }
  return rows;
}

void attach_wald(FitResult& f, double confidence_level) {
  const auto rows = wald_rows_from_information(f, {0.0, 0.0, 0.0}, confidence_level);
  for (const auto& row : rows) {
    const auto i = static_cast<std::size_t>(row.param);
    f.se[i] = row.se;
    f.ci_low[i] = row.ci_low;
    f.ci_high[i] = row.ci_high;
    f.p_value[i] = row.p_value;
  }
}

}  // namespace

void validate_record(const EventRecord& r) {
  if (!(r.time > 0.0) || !std::isfinite(r.time)) {
    throw std::invalid_argument("event record time must be positive and finite");
  }
  if (r.event != 0 && r.event != 1) throw std::invalid_argument("event indicator must be 0 or 1");
}

std::string_view param_name(Param p) noexcept {
  switch (p) {
    case Param::Theta:
      return "theta";
    case Param::Shape:
      return "gamma";
    case Param::Scale:
      return "beta";
  }
  return "?";
}

ParamVector to_vector(const ModelSpec& m) { return {m.theta(), m.shape(), m.scale()}; }

ModelSpec from_vector(ModelKind kind, const ParamVector& v) { return ModelSpec(kind, v[0], v[1], v[2]); }

double loglik_zt(std::span<const EventRecord> data, const ModelSpec& m) {
  require_nonempty(data, "loglik_zt");
  require_uncensored(data, "loglik_zt");
  if (m.kind() != ModelKind::ZeroTruncated) throw std::invalid_argument("loglik_zt: model must be zero-truncated");
  std::vector<double> terms;
  terms.reserve(data.size());
  for (const auto& r : data) {
    validate_record(r);
    terms.push_back(ztpw_log_density(r.time, m));
  }
  return order_free_sum(terms);
}

double loglik_ptm(std::span<const EventRecord> data, const ModelSpec& m) {
  require_nonempty(data, "loglik_ptm");
  if (m.kind() != ModelKind::PromotionTime) throw std::invalid_argument("loglik_ptm: model must be promotion-time");
  std::vector<double> terms;
  terms.reserve(data.size());
  for (const auto& r : data) {
    validate_record(r);
    terms.push_back(record_loglik(r, m));
  }
  return order_free_sum(terms);
}

double loglik(std::span<const EventRecord> data, const ModelSpec& m) {
  return m.kind() == ModelKind::ZeroTruncated ? loglik_zt(data, m) : loglik_ptm(data, m);
}

ParamVector score(std::span<const EventRecord> data, const ModelSpec& m) {
  require_nonempty(data, "score");
  if (m.kind() == ModelKind::ZeroTruncated) require_uncensored(data, "score");

  const double theta = m.theta();
  const double k = m.shape();
  const double lambda = m.scale();
  // d/dtheta of -ln(e^theta - 1) for the zero-truncated normalizer.
  const double zt_norm = -1.0 / -std::expm1(-theta);

  CompensatedSum d_theta;
  CompensatedSum d_shape;
  CompensatedSum d_scale;
  for (const auto& r : data) {
    validate_record(r);
    const double log_ratio = std::log(r.time / lambda);
    const double z = std::exp(k * log_ratio);  // (t/scale)^shape
    const double s = std::exp(-z);             // Weibull survival
    const double cdf = -std::expm1(-z);
    // theta * dS/d(shape, scale); shared by every term carrying theta*S or -theta*F.
    const double surv_shape = -theta * s * z * log_ratio;
    const double surv_scale = theta * s * k * z / lambda;

    if (m.kind() == ModelKind::ZeroTruncated) {
      d_theta.add(1.0 / theta + s + zt_norm);
      d_shape.add(1.0 / k + log_ratio * (1.0 - z) + surv_shape);
      d_scale.add(k / lambda * (z - 1.0) + surv_scale);
    } else if (r.event == 1) {
      d_theta.add(1.0 / theta - cdf);
      d_shape.add(1.0 / k + log_ratio * (1.0 - z) + surv_shape);
      d_scale.add(k / lambda * (z - 1.0) + surv_scale);
    } else {
      d_theta.add(-cdf);
      d_shape.add(surv_shape);
      d_scale.add(surv_scale);
    }
  }
  return {d_theta.value(), d_shape.value(), d_scale.value()};
}

ParamMatrix observed_information(std::span<const EventRecord> data, const ModelSpec& m, double relative_step) {
  const ParamVector x = to_vector(m);
  ParamMatrix h{};
  for (std::size_t j = 0; j < kNumParams; ++j) {
    const double step = std::min(relative_step * std::max(1.0, std::abs(x[j])), 0.5 * x[j]);
    ParamVector up = x;
    ParamVector down = x;
    up[j] += step;
    down[j] -= step;
    const ParamVector gu = score(data, from_vector(m.kind(), up));
    const ParamVector gd = score(data, from_vector(m.kind(), down));
    for (std::size_t i = 0; i < kNumParams; ++i) h[i][j] = (gu[i] - gd[i]) / (2.0 * step);
  }
  ParamMatrix info{};
  for (std::size_t i = 0; i < kNumParams; ++i)
    for (std::size_t j = 0; j < kNumParams; ++j) info[i][j] = -0.5 * (h[i][j] + h[j][i]);
  return info;
}

ModelSpec initial_guess(std::span<const EventRecord> data, ModelKind kind) {
  require_nonempty(data, "initial_guess");
  const KmCurve km = kaplan_meier(data);

  // Least squares of ln(-ln S) on ln t over the interior of the KM curve.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < km.times.size(); ++i) {
    const double s = km.survival[i];
    if (!(s > 0.0 && s < 1.0)) continue;
    const double x = std::log(km.times[i]);
    const double y = std::log(-std::log(s));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }

  double shape = 1.0;
  double scale = 0.0;
  const double nd = static_cast<double>(n);
  const double denom = nd * sxx - sx * sx;
  if (n >= 2 && denom > 0.0) {
    shape = (nd * sxy - sx * sy) / denom;
    const double intercept = (sy - shape * sx) / nd;
    if (shape > 0.0 && std::isfinite(shape)) scale = std::exp(-intercept / shape);
  }
  if (!(shape > 0.0) || !std::isfinite(shape) || !(scale > 0.0) || !std::isfinite(scale)) {
    shape = 1.0;
    double total = 0.0;
    for (const auto& r : data) total += r.time;
    scale = total / static_cast<double>(data.size());
  }
  shape = std::clamp(shape, 0.05, 20.0);

  double theta = 1.0;
  if (kind == ModelKind::PromotionTime) {
    // Given shape and scale, the log-likelihood in theta peaks at d / sum F(t_i).
    const WeibullParams w(shape, scale);
    std::size_t events = 0;
    double exposure = 0.0;
    for (const auto& r : data) {
      events += static_cast<std::size_t>(r.event == 1);
      exposure += weibull_cdf(r.time, w);
    }
    const double share = static_cast<double>(events) / static_cast<double>(data.size());
    theta = events > 0 && exposure > 0.0 ? static_cast<double>(events) / exposure
                                         : -std::log(std::max(0.01, 1.0 - share));
  }
  return ModelSpec(kind, theta, shape, scale);
}

FitResult fit_mle(std::span<const EventRecord> data, ModelKind kind, const FitOptions& options) {
  require_nonempty(data, "fit_mle");
  for (const auto& r : data) validate_record(r);
  std::size_t events = 0;
  for (const auto& r : data) events += static_cast<std::size_t>(r.event == 1);
  if (kind == ModelKind::ZeroTruncated) require_uncensored(data, "fit_mle");
  if (kind == ModelKind::PromotionTime && events == 0) {
    throw NoEventsError("fit_mle: no events in the data; the promotion-time MLE would sit at theta = 0");
  }

  // Canonical record order.
  std::vector<EventRecord> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end(), [](const EventRecord& a, const EventRecord& b) {
    return a.time != b.time ? a.time < b.time : a.event < b.event;
  });
  const LogProblem problem{sorted, kind};

  const ModelSpec start = initial_guess(sorted, kind);
  ParamVector phi{std::log(start.theta()), std::log(start.shape()), std::log(start.scale())};
  double value = problem.value(phi);

  FitResult result(start);
  result.n = data.size();
  result.events = events;
  if (!std::isfinite(value)) {
    result.message = "log-likelihood is not finite at the starting point";
    result.loglik = value;
    return result;
  }
  result.trace.push_back(value);

  ParamVector grad = problem.gradient(phi);
  bool small_gradient = sup_norm(grad) < options.gradient_tolerance;
  int iter = 0;
  for (; iter < options.max_iterations && !small_gradient; ++iter) {
    const Eigen::Vector3d g(grad[0], grad[1], grad[2]);
    Eigen::Vector3d dir;
    const Eigen::Matrix3d neg_hess = -problem.hessian(phi, options.hessian_step);
    const Eigen::LLT<Eigen::Matrix3d> llt(neg_hess);
    if (neg_hess.allFinite() && llt.info() == Eigen::Success) {
      dir = llt.solve(g);
    } else if (neg_hess.allFinite()) {
      // Indefinite: Levenberg-Marquardt shift.
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(neg_hess, Eigen::EigenvaluesOnly);
      const double shift = std::max(0.0, -eig.eigenvalues().minCoeff()) +
                           1e-3 * std::max(1.0, neg_hess.diagonal().cwiseAbs().maxCoeff());
      dir = (neg_hess + shift * Eigen::Matrix3d::Identity()).llt().solve(g);
    } else {
      dir = g / std::max(1.0, g.cwiseAbs().maxCoeff());
    }
    if (!dir.allFinite()) {
      result.message = "non-finite search direction";
      break;
    }

    // Steps within rounding noise of the objective are judged by the score.
    const double noise = options.objective_noise * std::max(1.0, std::abs(value));
    const double predicted_gain = std::abs(g.dot(dir));
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving, step *= 0.5) {
      ParamVector trial = phi;
      for (std::size_t j = 0; j < kNumParams; ++j) trial[j] += step * dir(Eigen::Index(j));
      const double trial_value = problem.value(trial);
      if (!std::isfinite(trial_value)) continue;
      bool take = trial_value >= value;
      if (!take && predicted_gain <= noise && trial_value >= value - noise) {
        take = sup_norm(problem.gradient(trial)) < sup_norm(grad);
      }
      if (take) {
        phi = trial;
        value = trial_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.message = "line search could not improve the log-likelihood";
      break;
    }
    result.trace.push_back(value);
    grad = problem.gradient(phi);
    small_gradient = sup_norm(grad) < options.gradient_tolerance;
  }

  result.model = from_vector(kind, problem.natural(phi));
  result.loglik = value;
  result.iterations = iter;
  result.gradient_norm = sup_norm(grad);
  if (!small_gradient) {
    if (result.message.empty()) result.message = "iteration limit reached";
    return result;
  }

  result.information = observed_information(sorted, result.model, options.hessian_step);
  try {
    attach_wald(result, options.confidence_level);
  } catch (const SingularInformationError& e) {
    result.message = e.what();
    return result;
  }
  result.converged = true;
  result.message.clear();
  return result;
}

double normal_critical_value(double confidence_level) {
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  }
  const boost::math::normal_distribution<double> std_normal;
  return boost::math::quantile(std_normal, 0.5 + 0.5 * confidence_level);
}

double two_sided_p_value(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

std::string format_p_value(double p) {
  if (p < 1e-4) return "< 0.0001";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", p);
  return buf;
}

WaldRow wald_row(Param param, double estimate, double se, double null_value, double confidence_level) {
  if (!(se > 0.0)) throw std::invalid_argument("wald_row: standard error must be positive");
  const double crit = normal_critical_value(confidence_level);
  const double z = (estimate - null_value) / se;
  return {param, estimate, se, estimate - crit * se, estimate + crit * se, z, two_sided_p_value(z)};
}

std::vector<WaldRow> wald_summary(const FitResult& f, const ParamVector& null_value, double confidence_level) {
  if (!f.converged) throw std::logic_error("wald_summary: fit did not converge");
  return wald_rows_from_information(f, null_value, confidence_level);
}

}  // namespace lcrisk
