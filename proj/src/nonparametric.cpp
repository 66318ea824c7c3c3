#include "lcrisk/nonparametric.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace lcrisk {

double KmCurve::at(double t) const {
  // First event time strictly greater than t; the step value is the one before it.
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(std::distance(times.begin(), it)) - 1];
}

KmCurve kaplan_meier(std::span<const EventRecord> data) {
  if (data.empty()) throw std::invalid_argument("kaplan_meier: empty dataset");
  for (const auto& r : data) validate_record(r);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (data[a].time != data[b].time) return data[a].time < data[b].time;
    return data[a].event > data[b].event;  // events first at ties
  });

  KmCurve curve;
  std::size_t at_risk = data.size();
  double s = 1.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = data[order[i]].time;
    std::size_t deaths = 0;
    std::size_t leaving = 0;
    for (; i < order.size() && data[order[i]].time == t; ++i) {
      deaths += static_cast<std::size_t>(data[order[i]].event);
      ++leaving;
    }
    if (deaths > 0) {
      s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      curve.times.push_back(t);
      curve.survival.push_back(s);
      curve.at_risk.push_back(at_risk);
      curve.events.push_back(deaths);
    }
    at_risk -= leaving;
  }
  return curve;
}

std::vector<OverlayRow> overlay_export(const KmCurve& curve, const ModelSpec& m, std::span<const double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("overlay_export: grid must be sorted");
  }
  std::vector<OverlayRow> rows;
  rows.reserve(grid.size());
  for (double t : grid) {
    if (!(t >= 0.0)) throw std::invalid_argument("overlay_export: grid times must be non-negative");
    rows.push_back({t, curve.at(t), survival(t, m)});
  }
  return rows;
}

}  // namespace lcrisk
