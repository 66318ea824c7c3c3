// Command-line front end: fit, simulate, km, report.
//
// Exit codes: 0 success, 1 input or validation error, 2 non-convergence.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lcrisk/nonparametric.hpp"
#include "lcrisk/report.hpp"
#include "lcrisk/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;

std::vector<lcrisk::CohortDataset> load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file '" + path + "'");
  return lcrisk::read_events_csv(in);
}

/// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
  write(out);
}

double parse_horizon(const std::string& text) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double h = std::stod(text, &pos);
  if (pos != text.size() || !(h > 0.0)) throw std::invalid_argument("horizon must be a positive number or 'inf'");
  return h;
}

void assign_kind(std::vector<lcrisk::CohortDataset>& cohorts, const std::string& model) {
  for (auto& ds : cohorts) {
    ds.kind = model == "auto" ? lcrisk::detect_kind(ds.records) : lcrisk::parse_model_kind(model);
  }
}

struct FitArgs {
  std::string input;
  std::string model = "auto";
  double horizon = 24.0;
  std::string out;
  std::string format = "text";
};

int run_fit(const FitArgs& a) {
  auto cohorts = load(a.input);
  assign_kind(cohorts, a.model);
  const auto fits = lcrisk::fit_cohorts(cohorts, a.horizon);
  emit(a.out, [&](std::ostream& os) {
    if (a.format == "json") {
      os << lcrisk::render_fit_json(fits, a.horizon);
    } else {
      for (const auto& f : fits) os << lcrisk::render_fit_text(f) << '\n';
    }
  });
  const bool all_converged = std::all_of(fits.begin(), fits.end(), [](const auto& f) { return f.fit.converged; });
  return all_converged ? kExitOk : kExitNoConvergence;
}

struct SimulateArgs {
  std::string model;
  double theta = 0.0;
  double shape = 0.0;
  double scale = 0.0;
  std::size_t n = 0;
  std::string horizon;
  std::uint64_t seed = 0;
  std::string cohort = "sim";
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const lcrisk::SimConfig cfg{lcrisk::ModelSpec(lcrisk::parse_model_kind(a.model), a.theta, a.shape, a.scale), a.n,
                              parse_horizon(a.horizon), a.seed, a.cohort};
  const auto records = lcrisk::simulate_cohort(cfg);
  emit(a.out, [&](std::ostream& os) { lcrisk::write_events_csv(os, records); });
  return kExitOk;
}

struct KmArgs {
  std::string input;
  std::string cohort;
  std::optional<double> theta;
  std::optional<double> shape;
  std::optional<double> scale;
  std::string overlay_model = "ptm";
  std::size_t grid_points = 200;
  std::string out;
};

int run_km(const KmArgs& a) {
  const auto cohorts = load(a.input);
  const lcrisk::CohortDataset* chosen = nullptr;
  if (a.cohort.empty()) {
    if (cohorts.size() != 1) {
      throw std::invalid_argument("input holds " + std::to_string(cohorts.size()) + " cohorts; pick one with --cohort");
    }
    chosen = &cohorts.front();
  } else {
    for (const auto& ds : cohorts) {
      if (ds.cohort == a.cohort) chosen = &ds;
    }
    if (chosen == nullptr) throw std::invalid_argument("cohort '" + a.cohort + "' not found in input");
  }

  const auto curve = lcrisk::kaplan_meier(chosen->records);
  const bool overlay = a.theta || a.shape || a.scale;
  if (!overlay) {
    emit(a.out, [&](std::ostream& os) { lcrisk::write_km_csv(os, curve); });
    return kExitOk;
  }
  if (!(a.theta && a.shape && a.scale)) {
    throw std::invalid_argument("overlay needs --overlay-theta, --overlay-shape and --overlay-scale together");
  }
  if (a.grid_points < 2) throw std::invalid_argument("--grid-points must be at least 2");
  const lcrisk::ModelSpec model(lcrisk::parse_model_kind(a.overlay_model), *a.theta, *a.shape, *a.scale);

  double t_max = 0.0;
  for (const auto& r : chosen->records) t_max = std::max(t_max, r.time);
  std::vector<double> grid(a.grid_points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = t_max * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  const auto rows = lcrisk::overlay_export(curve, model, grid);
  emit(a.out, [&](std::ostream& os) { lcrisk::write_overlay_csv(os, rows); });
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string model = "auto";
  double horizon = 24.0;
  std::string out;
  std::string format = "text";
};

int run_report(const ReportArgs& a) {
  std::vector<lcrisk::CohortDataset> all;
  for (const auto& path : a.inputs) {
    auto cohorts = load(path);
    assign_kind(cohorts, a.model);
    std::move(cohorts.begin(), cohorts.end(), std::back_inserter(all));
  }
  const auto fits = lcrisk::fit_cohorts(all, a.horizon);
  const auto rows = lcrisk::build_summary_table(fits, a.horizon);
  emit(a.out, [&](std::ostream& os) {
    os << (a.format == "json" ? lcrisk::render_summary_json(rows, a.horizon)
                              : lcrisk::render_summary_text(rows, a.horizon));
  });
  const bool all_converged = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.converged; });
  return all_converged ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent competing-risk survival models for loan default and recovery times"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds{"zt", "ptm"};
  const std::vector<std::string> kinds_auto{"zt", "ptm", "auto"};
  const std::vector<std::string> formats{"text", "json"};

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit each cohort by maximum likelihood and print Wald summaries");
  fit->add_option("--input", fit_args.input, "CSV with header time,event,cohort")->required();
  fit->add_option("--model", fit_args.model, "zt, ptm, or auto (zt when nothing is censored)")
      ->check(CLI::IsMember(kinds_auto));
  fit->add_option("--horizon", fit_args.horizon, "Horizon for ELGD")->check(CLI::PositiveNumber);
  fit->add_option("--out", fit_args.out, "Output path (default stdout)");
  fit->add_option("--format", fit_args.format, "text or json")->check(CLI::IsMember(formats));

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Simulate a cohort from a latent competing-risk model");
  sim->add_option("--model", sim_args.model)->required()->check(CLI::IsMember(kinds));
  sim->add_option("--theta", sim_args.theta)->required();
  sim->add_option("--shape", sim_args.shape)->required();
  sim->add_option("--scale", sim_args.scale)->required();
  sim->add_option("--n", sim_args.n)->required();
  sim->add_option("--horizon", sim_args.horizon, "Censoring time; 'inf' allowed for zt")->required();
  sim->add_option("--seed", sim_args.seed)->required();
  sim->add_option("--cohort", sim_args.cohort, "Cohort label written to every row");
  sim->add_option("--out", sim_args.out)->required();

  KmArgs km_args;
  auto* km = app.add_subcommand("km", "Kaplan-Meier curve, optionally overlaid with a model survival curve");
  km->add_option("--input", km_args.input)->required();
  km->add_option("--cohort", km_args.cohort, "Cohort to use when the input holds several");
  km->add_option("--overlay-theta", km_args.theta);
  km->add_option("--overlay-shape", km_args.shape);
  km->add_option("--overlay-scale", km_args.scale);
  km->add_option("--overlay-model", km_args.overlay_model)->check(CLI::IsMember(kinds));
  km->add_option("--grid-points", km_args.grid_points, "Overlay grid size on [0, max time]");
  km->add_option("--out", km_args.out)->required();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Cross-cohort summary: theta-default, theta-recovery, ELGD%");
  report->add_option("--input", report_args.inputs, "CSV input; repeat to combine default and recovery files")
      ->required();
  report->add_option("--model", report_args.model)->check(CLI::IsMember(kinds_auto));
  report->add_option("--horizon", report_args.horizon)->required()->check(CLI::PositiveNumber);
  report->add_option("--out", report_args.out);
  report->add_option("--format", report_args.format)->check(CLI::IsMember(formats));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit) return run_fit(fit_args);
    if (*sim) return run_simulate(sim_args);
    if (*km) return run_km(km_args);
    if (*report) return run_report(report_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
