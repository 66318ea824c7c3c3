#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcrisk/inference.hpp"
#include "lcrisk/nonparametric.hpp"

namespace lcrisk {

/// Records of one cohort, in input order.
struct CohortDataset {
  std::string cohort;
  std::vector<EventRecord> records;
  ModelKind kind = ModelKind::PromotionTime;
};

enum class CsvErrorKind {
  MissingHeader,
  MalformedRow,
  NonNumericTime,
  NonPositiveTime,
  BadEventFlag,
};

class CsvError : public std::runtime_error {
 public:
  CsvError(CsvErrorKind kind, std::size_t line, const std::string& detail);
  CsvErrorKind kind() const noexcept { return kind_; }
  /// 1-based line number in the input (the header is line 1).
  std::size_t line() const noexcept { return line_; }

 private:
  CsvErrorKind kind_;
  std::size_t line_;
};

/// Reads `time,event,cohort` rows (the cohort column may be omitted, giving
/// cohort "all"). Cohorts come back sorted by label; `kind` is stamped on each.
std::vector<CohortDataset> read_events_csv(std::istream& in, ModelKind kind = ModelKind::PromotionTime);

/// Writes the `time,event,cohort` header and one row per record, times at 17 significant digits.
void write_events_csv(std::ostream& out, std::span<const EventRecord> records);

/// Zero-truncated when no record is censored, promotion-time otherwise.
ModelKind detect_kind(std::span<const EventRecord> records);

struct CohortFit {
  std::string cohort;
  FitResult fit;
  /// Empirical non-recovered share at the horizon, when follow-up reaches it.
  std::optional<double> observed_lgd;
};

/// KM estimate of the unrecovered share at `horizon`, or nullopt when no record
/// is followed that long.
std::optional<double> observed_lgd(std::span<const EventRecord> records, double horizon);

/// One Table-1 style row. A cohort label may carry both a default (zt) fit and a
/// recovery (ptm) fit; they merge into one row.
struct SummaryRow {
  std::string cohort;
  std::optional<double> theta_default;   ///< zt_poisson_mean of the zt theta estimate
  std::optional<double> theta_recovery;  ///< raw ptm theta estimate
  std::optional<double> observed_lgd_percent;
  std::optional<double> elgd_percent;    ///< 100 * elgd_at_horizon
  bool converged = true;
  std::string note;
};

std::vector<SummaryRow> build_summary_table(std::span<const CohortFit> fits, double horizon);

/// Fits every cohort concurrently, one task per cohort; output follows input order.
std::vector<CohortFit> fit_cohorts(std::span<const CohortDataset> cohorts, double horizon,
                                   const FitOptions& options = {});

// Rendering.
std::string render_fit_text(const CohortFit& fit);
std::string render_fit_json(std::span<const CohortFit> fits, double horizon);
std::string render_summary_text(std::span<const SummaryRow> rows, double horizon);
std::string render_summary_json(std::span<const SummaryRow> rows, double horizon);
void write_overlay_csv(std::ostream& out, std::span<const OverlayRow> rows);
void write_km_csv(std::ostream& out, const KmCurve& curve);

}  // namespace lcrisk
