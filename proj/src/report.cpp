#include "lcrisk/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <string_view>

namespace lcrisk {

namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::string_view error_label(CsvErrorKind kind) {
  switch (kind) {
    case CsvErrorKind::MissingHeader:
      return "missing header";
    case CsvErrorKind::MalformedRow:
      return "malformed row";
    case CsvErrorKind::NonNumericTime:
      return "non-numeric time";
    case CsvErrorKind::NonPositiveTime:
      return "non-positive time";
    case CsvErrorKind::BadEventFlag:
      return "event flag must be 0 or 1";
  }
  return "error";
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string optional_cell(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "..."; }

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

CsvError::CsvError(CsvErrorKind kind, std::size_t line, const std::string& detail)
    : std::runtime_error("line " + std::to_string(line) + ": " + std::string(error_label(kind)) +
                         (detail.empty() ? "" : " (" + detail + ")")),
      kind_(kind),
      line_(line) {}

std::vector<CohortDataset> read_events_csv(std::istream& in, ModelKind kind) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool has_cohort_column = true;
  std::map<std::string, CohortDataset> cohorts;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto fields = split(view, ',');

    if (!have_header) {
      if (fields.size() == 3 && fields[0] == "time" && fields[1] == "event" && fields[2] == "cohort") {
        has_cohort_column = true;
      } else if (fields.size() == 2 && fields[0] == "time" && fields[1] == "event") {
        has_cohort_column = false;
      } else {
        throw CsvError(CsvErrorKind::MissingHeader, line_no, "expected 'time,event,cohort'");
      }
      have_header = true;
      continue;
    }

    const std::size_t expected = has_cohort_column ? 3 : 2;
    if (fields.size() != expected) {
      throw CsvError(CsvErrorKind::MalformedRow, line_no,
                     "expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
    }

    double time = 0.0;
    const auto tf = fields[0];
    const auto [tp, tec] = std::from_chars(tf.data(), tf.data() + tf.size(), time);
    if (tec != std::errc{} || tp != tf.data() + tf.size() || !std::isfinite(time)) {
      throw CsvError(CsvErrorKind::NonNumericTime, line_no, std::string(tf));
    }
    if (!(time > 0.0)) throw CsvError(CsvErrorKind::NonPositiveTime, line_no, std::string(tf));

    int event = 0;
    if (fields[1] == "1") {
      event = 1;
    } else if (fields[1] != "0") {
      throw CsvError(CsvErrorKind::BadEventFlag, line_no, std::string(fields[1]));
    }

    std::string label = has_cohort_column ? std::string(fields[2]) : std::string("all");
    auto& ds = cohorts[label];
    if (ds.records.empty()) {
      ds.cohort = label;
      ds.kind = kind;
    }
    ds.records.push_back({time, event, std::move(label)});
  }
  if (!have_header) throw CsvError(CsvErrorKind::MissingHeader, std::max<std::size_t>(line_no, 1), "empty input");

  std::vector<CohortDataset> out;
  out.reserve(cohorts.size());
  for (auto& [label, ds] : cohorts) out.push_back(std::move(ds));
  return out;
}

void write_events_csv(std::ostream& out, std::span<const EventRecord> records) {
  out << "time,event,cohort\n";
  for (const auto& r : records) out << g17(r.time) << ',' << r.event << ',' << r.cohort << '\n';
}

ModelKind detect_kind(std::span<const EventRecord> records) {
  const bool censored = std::any_of(records.begin(), records.end(), [](const EventRecord& r) { return r.event == 0; });
  return censored ? ModelKind::PromotionTime : ModelKind::ZeroTruncated;
}

std::optional<double> observed_lgd(std::span<const EventRecord> records, double horizon) {
  if (records.empty()) return std::nullopt;
  const double longest =
      std::max_element(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.time < b.time; })
          ->time;
  if (longest < horizon) return std::nullopt;
  return kaplan_meier(records).at(horizon);
}

std::vector<SummaryRow> build_summary_table(std::span<const CohortFit> fits, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("build_summary_table: horizon must be positive");
  std::map<std::string, SummaryRow> rows;
  for (const auto& cf : fits) {
    auto& row = rows[cf.cohort];
    row.cohort = cf.cohort;
    const auto& model = cf.fit.model;
    if (!cf.fit.converged) {
      row.converged = false;
      if (!row.note.empty()) row.note += "; ";
      row.note += std::string(to_string(model.kind())) + " fit did not converge: " + cf.fit.message;
    }
    if (model.kind() == ModelKind::ZeroTruncated) {
      row.theta_default = zt_poisson_mean(model.theta());
    } else {
      row.theta_recovery = model.theta();
      row.elgd_percent = 100.0 * elgd_at_horizon(model, horizon);
      if (cf.observed_lgd) row.observed_lgd_percent = 100.0 * *cf.observed_lgd;
    }
  }
  std::vector<SummaryRow> out;
  out.reserve(rows.size());
  for (auto& [label, row] : rows) out.push_back(std::move(row));
  return out;
}

std::vector<CohortFit> fit_cohorts(std::span<const CohortDataset> cohorts, double horizon, const FitOptions& options) {
  std::vector<std::future<CohortFit>> jobs;
  jobs.reserve(cohorts.size());
  for (const auto& ds : cohorts) {
    jobs.push_back(std::async(std::launch::async, [&ds, horizon, options] {
      CohortFit cf{ds.cohort, fit_mle(ds.records, ds.kind, options), std::nullopt};
      if (ds.kind == ModelKind::PromotionTime) cf.observed_lgd = observed_lgd(ds.records, horizon);
      return cf;
    }));
  }
  std::vector<CohortFit> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::string render_fit_text(const CohortFit& cf) {
  const FitResult& f = cf.fit;
  std::ostringstream os;
  os << "cohort " << cf.cohort << "  model " << to_string(f.model.kind()) << "  n " << f.n << "  events " << f.events
     << "  loglik " << fixed(f.loglik, 4) << "  iterations " << f.iterations << '\n';
  if (!f.converged) {
    os << "  NOT CONVERGED: " << f.message << "  (gradient sup-norm " << g17(f.gradient_norm) << ")\n";
    os << "  last iterate: theta " << fixed(f.model.theta(), 4) << "  gamma " << fixed(f.model.shape(), 4)
       << "  beta " << fixed(f.model.scale(), 4) << '\n';
    return os.str();
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "  %-9s %12s %10s %12s %12s %10s\n", "Parameter", "Estimate", "SE", "LI", "UI",
                "p-value");
  os << buf;
  for (const auto& row : wald_summary(f)) {
    std::snprintf(buf, sizeof buf, "  %-9s %12.4f %10.4f %12.4f %12.4f %10s\n",
                  std::string(param_name(row.param)).c_str(), row.estimate, row.se, row.ci_low, row.ci_high,
                  format_p_value(row.p_value).c_str());
    os << buf;
  }
  return os.str();
}

std::string render_fit_json(std::span<const CohortFit> fits, double horizon) {
  nlohmann::json doc;
  doc["horizon"] = horizon;
  doc["cohorts"] = nlohmann::json::array();
  for (const auto& cf : fits) {
    const FitResult& f = cf.fit;
    nlohmann::json j;
    j["cohort"] = cf.cohort;
    j["model"] = std::string(to_string(f.model.kind()));
    j["n"] = f.n;
    j["events"] = f.events;
    j["loglik"] = f.loglik;
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    j["gradient_norm"] = f.gradient_norm;
    if (!f.message.empty()) j["message"] = f.message;
    nlohmann::json params = nlohmann::json::array();
    if (f.converged) {
      for (const auto& row : wald_summary(f)) {
        params.push_back({{"parameter", std::string(param_name(row.param))},
                          {"estimate", row.estimate},
                          {"se", row.se},
                          {"ci_low", row.ci_low},
                          {"ci_high", row.ci_high},
                          {"p_value", row.p_value}});
      }
    } else {
      for (Param p : {Param::Shape, Param::Scale, Param::Theta}) {
        params.push_back({{"parameter", std::string(param_name(p))},
                          {"estimate", to_vector(f.model)[static_cast<std::size_t>(p)]}});
      }
    }
    j["parameters"] = std::move(params);
    if (f.model.kind() == ModelKind::ZeroTruncated) {
      j["expected_risk_count"] = zt_poisson_mean(f.model.theta());
    } else {
      j["elgd_at_horizon"] = elgd_at_horizon(f.model, horizon);
      j["cure_fraction"] = cure_fraction(f.model);
      j["observed_lgd"] = optional_json(cf.observed_lgd);
    }
    doc["cohorts"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string render_summary_text(std::span<const SummaryRow> rows, double horizon) {
  std::ostringstream os;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-10s %14s %14s %14s %10s\n", "Cohort", "theta-default", "theta-recovery",
                "Observed LGD", "ELGD%");
  os << "Poisson-Weibull parameters (ELGD at horizon " << g17(horizon) << ")\n" << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %14s %14s %14s %10s", r.cohort.c_str(), optional_cell(r.theta_default, 4).c_str(),
                  optional_cell(r.theta_recovery, 4).c_str(), optional_cell(r.observed_lgd_percent, 3).c_str(),
                  optional_cell(r.elgd_percent, 3).c_str());
    os << buf;
    if (!r.converged) os << "  [" << r.note << "]";
    os << '\n';
  }
  return os.str();
}

std::string render_summary_json(std::span<const SummaryRow> rows, double horizon) {
  nlohmann::json doc;
  doc["horizon"] = horizon;
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"cohort", r.cohort},
                     {"theta_default", optional_json(r.theta_default)},
                     {"theta_recovery", optional_json(r.theta_recovery)},
                     {"observed_lgd_percent", optional_json(r.observed_lgd_percent)},
                     {"elgd_percent", optional_json(r.elgd_percent)},
                     {"converged", r.converged}};
    if (!r.note.empty()) j["note"] = r.note;
    doc["rows"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

void write_overlay_csv(std::ostream& out, std::span<const OverlayRow> rows) {
  out << "t,km,model\n";
  for (const auto& r : rows) out << g17(r.t) << ',' << g17(r.km) << ',' << g17(r.model) << '\n';
}

void write_km_csv(std::ostream& out, const KmCurve& curve) {
  out << "time,survival,at_risk,events\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << g17(curve.times[i]) << ',' << g17(curve.survival[i]) << ',' << curve.at_risk[i] << ',' << curve.events[i]
        << '\n';
  }
}

}  // namespace lcrisk
