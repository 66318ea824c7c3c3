#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcrisk/models.hpp"

namespace lcrisk {

/// One loan: observed time, event indicator (1 = event seen, 0 = right-censored), cohort label.
struct EventRecord {
  double time = 0.0;
  int event = 1;
  std::string cohort;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Throws std::invalid_argument unless time > 0 (finite) and event is 0 or 1.
void validate_record(const EventRecord& r);

/// Parameter order used by every 3-vector in this module.
enum class Param { Theta = 0, Shape = 1, Scale = 2 };
inline constexpr std::size_t kNumParams = 3;
using ParamVector = std::array<double, kNumParams>;
using ParamMatrix = std::array<ParamVector, kNumParams>;

std::string_view param_name(Param p) noexcept;

ParamVector to_vector(const ModelSpec& m);
ModelSpec from_vector(ModelKind kind, const ParamVector& v);

double loglik_zt(std::span<const EventRecord> data, const ModelSpec& m);
double loglik_ptm(std::span<const EventRecord> data, const ModelSpec& m);
double loglik(std::span<const EventRecord> data, const ModelSpec& m);

/// Analytic score (d loglik / d(theta, shape, scale)) in the original parameterization.
ParamVector score(std::span<const EventRecord> data, const ModelSpec& m);

/// Observed information: minus the Hessian of the log-likelihood in the original
/// parameterization, by central differences of the analytic score, symmetrized.
ParamMatrix observed_information(std::span<const EventRecord> data, const ModelSpec& m,
                                 double relative_step = 1e-5);

struct FitOptions {
  double gradient_tolerance = 1e-8;  ///< sup-norm of the score in log coordinates
  int max_iterations = 200;
  int max_halvings = 40;
  double hessian_step = 1e-5;
  /// Relative resolution of the log-likelihood. Steps whose predicted gain is below
  /// it are judged by the score sup-norm, and may lower the objective by at most this much.
  double objective_noise = 1e-12;
  double confidence_level = 0.95;
};

/// Maximum-likelihood fit with Wald statistics.
///
/// `converged` is true only when the score sup-norm in the optimizer's log
/// coordinates dropped below the tolerance and the observed information is
/// positive definite. Otherwise the estimates are the last accepted iterate and
/// `message` says what went wrong.
struct FitResult {
  explicit FitResult(ModelSpec m) : model(m) {}

  ModelSpec model;
  ParamVector se{};
  ParamVector ci_low{};
  ParamVector ci_high{};
  ParamVector p_value{};
  ParamMatrix information{};
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::size_t n = 0;
  std::size_t events = 0;
  std::string message;
  /// Objective value after each accepted step, starting with the initial point.
  std::vector<double> trace;
};

/// Thrown when a promotion-time fit is requested on data with no events.
class NoEventsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Starting values: shape/scale from a least-squares line through
/// ln(-ln S_KM(t)) against ln t, theta = 1 (zt) or -ln(max(0.01, 1 - event share)) (ptm).
ModelSpec initial_guess(std::span<const EventRecord> data, ModelKind kind);

FitResult fit_mle(std::span<const EventRecord> data, ModelKind kind, const FitOptions& options = {});

/// Thrown by wald_summary when the information matrix is not positive definite.
class SingularInformationError : public std::runtime_error {
 public:
  SingularInformationError(Param offending, const std::string& what)
      : std::runtime_error(what), offending_(offending) {}
  Param offending() const noexcept { return offending_; }

 private:
  Param offending_;
};

struct WaldRow {
  Param param;
  double estimate;
  double se;
  double ci_low;
  double ci_high;
  double z;
  double p_value;
};

/// Wald rows in (shape, scale, theta) order.
/// SE from the inverse observed information; CI = estimate -/+ z_crit * SE;
/// two-sided normal p-value for (estimate - null) / SE.
std::vector<WaldRow> wald_summary(const FitResult& f, const ParamVector& null_value = {0.0, 0.0, 0.0},
                                  double confidence_level = 0.95);

/// One Wald row from an estimate and its standard error.
WaldRow wald_row(Param param, double estimate, double se, double null_value = 0.0,
                 double confidence_level = 0.95);

/// Two-sided normal quantile for the given confidence level (0.95 -> 1.959964).
double normal_critical_value(double confidence_level);
double two_sided_p_value(double z);
/// Four decimals, or "< 0.0001" below that.
std::string format_p_value(double p);

}  // namespace lcrisk
