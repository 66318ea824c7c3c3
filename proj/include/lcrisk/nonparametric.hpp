#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lcrisk/inference.hpp"
#include "lcrisk/models.hpp"

namespace lcrisk {

/// Product-limit survival estimate, listed at the distinct event times only.
struct KmCurve {
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<std::size_t> at_risk;
  std::vector<std::size_t> events;

  /// Right-continuous step value: the estimate at the last event time <= t, 1 before the first.
  double at(double t) const;
  bool empty() const noexcept { return times.empty(); }
};

/// Kaplan-Meier estimator. Events at a tied time are counted before censorings
/// at that time, so a record censored at t is still at risk at t.
KmCurve kaplan_meier(std::span<const EventRecord> data);

struct OverlayRow {
  double t;
  double km;
  double model;
};

/// KM step function and model survival side by side on `grid` (sorted, non-negative).
std::vector<OverlayRow> overlay_export(const KmCurve& curve, const ModelSpec& m, std::span<const double> grid);

}  // namespace lcrisk
