// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lcrisk/inference.hpp"
#include "lcrisk/nonparametric.hpp"
#include "lcrisk/simulation.hpp"
#include "oracles.hpp"
#include "portfolio_fits.hpp"

using namespace lcrisk;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

template <typename Fn>
void criterion(int id, const char* name, Fn&& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] %d. %s: %s (%.2fs)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(), secs);
  std::fflush(stdout);
  if (!out.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

ModelSpec spec(ModelKind kind, const portfolio::CohortFit& c) {
  return ModelSpec(kind, c.theta.estimate, c.shape.estimate, c.scale.estimate);
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

Outcome elgd_reproduction() {
  double worst = 0.0;
  for (std::size_t i = 0; i < portfolio::kRecovery.size(); ++i) {
    const double elgd = 100.0 * elgd_at_horizon(spec(ModelKind::PromotionTime, portfolio::kRecovery[i]),
                                                 portfolio::kRecoveryHorizon);
    worst = std::max(worst, std::abs(elgd - portfolio::kElgdPercentColumn[i]));
  }
  return {worst <= 0.05, fmt("max |ELGD%% - reference| = %.4f pp (tolerance 0.05)", worst)};
}

Outcome theta_default_reconciliation() {
  double worst = 0.0;
  for (std::size_t i = 0; i < portfolio::kDefault.size(); ++i) {
    worst = std::max(worst, std::abs(zt_poisson_mean(portfolio::kDefault[i].theta.estimate) -
                                     portfolio::kThetaDefaultColumn[i]));
  }
  return {worst <= 0.005, fmt("max |E[M | M >= 1] - reference| = %.5f (tolerance 0.005)", worst)};
}

Outcome wald_reconstruction() {
  double worst = 0.0;
  int rows = 0;
  for (const auto* table : {&portfolio::kDefault, &portfolio::kRecovery}) {
    for (const auto& c : *table) {
      for (const auto* p : {&c.shape, &c.scale, &c.theta}) {
        const WaldRow w = wald_row(Param::Theta, p->estimate, p->se);
        worst = std::max({worst, std::abs(w.ci_low - p->lower), std::abs(w.ci_high - p->upper)});
        ++rows;
      }
    }
  }
  return {rows == 30 && worst <= 0.001,
          fmt("%.0f rows, max |bound - printed| = %.5f (tolerance 0.001)", rows, worst)};
}

Outcome parameter_recovery() {
  struct Job {
    ModelKind kind;
    const portfolio::CohortFit* cohort;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& c : portfolio::kDefault)
    for (std::uint64_t s = 0; s < 10; ++s) jobs.push_back({ModelKind::ZeroTruncated, &c, 1000 + s});
  for (const auto& c : portfolio::kRecovery)
    for (std::uint64_t s = 0; s < 10; ++s) jobs.push_back({ModelKind::PromotionTime, &c, 2000 + s});

  // covered[job][param]: estimate within 3 reported SEs of the generating value.
  std::vector<std::array<bool, 3>> covered(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& job = jobs[i];
    const ModelSpec truth = spec(job.kind, *job.cohort);
    const double horizon = job.kind == ModelKind::ZeroTruncated ? INFINITY : portfolio::kRecoveryHorizon;
    try {
      const auto data = simulate_cohort({truth, 20000, horizon, job.seed});
      const FitResult fit = fit_mle(data, job.kind);
      if (!fit.converged) {
        errors[i] = fit.message;
        covered[i] = {false, false, false};
        return;
      }
      const ParamVector t = to_vector(truth), e = to_vector(fit.model);
      for (std::size_t j = 0; j < kNumParams; ++j) covered[i][j] = std::abs(e[j] - t[j]) <= 3.0 * fit.se[j];
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
      covered[i] = {false, false, false};
    }
  });

  bool pass = true;
  int worst = 10;
  std::string detail;
  for (std::size_t g = 0; g < jobs.size(); g += 10) {
    for (std::size_t j = 0; j < kNumParams; ++j) {
      int hits = 0;
      for (std::size_t s = 0; s < 10; ++s) hits += covered[g + s][j] ? 1 : 0;
      worst = std::min(worst, hits);
      if (hits < 9) {
        pass = false;
        detail += " " + std::string(to_string(jobs[g].kind)) + "/" + std::string(jobs[g].cohort->cohort) + "/" +
                  std::string(param_name(static_cast<Param>(j))) + "=" + std::to_string(hits) + "/10";
      }
    }
  }
  std::size_t failed_fits = 0;
  for (const auto& e : errors) failed_fits += e.empty() ? 0 : 1;
  return {pass, "10 parameter sets x 10 seeds, n = 20000; worst coverage " + std::to_string(worst) +
                    "/10 (need >= 9), failed fits " + std::to_string(failed_fits) + detail};
}

Outcome calculus_identities() {
  double zt_mass = 0.0, ptm_mass = 0.0, deriv = 0.0, hazard = 0.0;
  auto derivative_error = [](const ModelSpec& m) {
    const double h = 1e-5 * m.scale();
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double t = m.scale() * (0.05 + 2.95 * i / 49.0);
      const double fd = -oracle::central_difference([&](double u) { return survival(u, m); }, t, h);
      const double f = density(t, m);
      if (f > 0.0) worst = std::max(worst, std::abs(fd - f) / f);
    }
    return worst;
  };
  for (const auto& c : portfolio::kDefault) {
    const auto m = spec(ModelKind::ZeroTruncated, c);
    const double mass = oracle::integrate([&](double t) { return ztpw_density(t, m); }, 0.0, 20.0 * m.scale());
    zt_mass = std::max(zt_mass, std::abs(mass - 1.0));
    deriv = std::max(deriv, derivative_error(m));
  }
  for (const auto& c : portfolio::kRecovery) {
    const auto m = spec(ModelKind::PromotionTime, c);
    const double mass = oracle::integrate([&](double t) { return ptm_density(t, m); }, 0.0, 50.0 * m.scale());
    ptm_mass = std::max(ptm_mass, std::abs(mass - (1.0 - std::exp(-m.theta()))));
    deriv = std::max(deriv, derivative_error(m));
    for (int i = 1; i <= 50; ++i) {
      const double t = m.scale() * 4.0 * i / 50.0;
      const double expected = m.theta() * weibull_pdf(t, m.weibull());
      hazard = std::max(hazard, std::abs(ptm_density(t, m) / ptm_survival(t, m) - expected) / expected);
    }
  }
  const bool pass = zt_mass <= 1e-6 && ptm_mass <= 1e-6 && deriv <= 1e-5 && hazard <= 1e-9;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "zt mass err %.2e, ptm mass err %.2e (tol 1e-6); density vs -S' rel %.2e (tol 1e-5); "
                "hazard identity rel %.2e (tol 1e-9)",
                zt_mass, ptm_mass, deriv, hazard);
  return {pass, buf};
}

Outcome gradient_check() {
  double worst = 0.0;
  int points = 0;
  auto run = [&](ModelKind kind, const portfolio::CohortFit& c, double horizon) {
    const auto data = simulate_cohort({spec(kind, c), 500, horizon, 606});
    std::mt19937_64 gen(31337);
    std::uniform_real_distribution<double> jitter(0.6, 1.5);
    for (int p = 0; p < 20; ++p, ++points) {
      const ParamVector x{c.theta.estimate * jitter(gen), c.shape.estimate * jitter(gen),
                          c.scale.estimate * jitter(gen)};
      const ParamVector g = score(data, from_vector(kind, x));
      for (std::size_t j = 0; j < kNumParams; ++j) {
        const double h = 1e-6 * x[j];
        ParamVector up = x, down = x;
        up[j] += h;
        down[j] -= h;
        const double fd = (loglik(data, from_vector(kind, up)) - loglik(data, from_vector(kind, down))) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
      }
    }
  };
  run(ModelKind::ZeroTruncated, portfolio::kDefault[1], INFINITY);
  run(ModelKind::PromotionTime, portfolio::kRecovery[2], portfolio::kRecoveryHorizon);
  return {worst <= 1e-5, fmt("%.0f points, max relative error %.2e (tolerance 1e-5)", points, worst)};
}

Outcome km_oracle() {
  struct Row {
    int flags[3];
    double s[3];
  };
  // Product-limit factors written out by hand: (1 - d/n) at each event time.
  const double a = 1.0 - 1.0 / 3.0, b = 1.0 - 1.0 / 2.0;
  const Row table[] = {
      {{1, 1, 1}, {a, a * b, 0.0}}, {{1, 1, 0}, {a, a * b, a * b}}, {{1, 0, 1}, {a, a, 0.0}},
      {{1, 0, 0}, {a, a, a}},       {{0, 1, 1}, {1.0, b, 0.0}},     {{0, 1, 0}, {1.0, b, b}},
      {{0, 0, 1}, {1.0, 1.0, 0.0}}, {{0, 0, 0}, {1.0, 1.0, 1.0}},
  };
  int mismatches = 0;
  for (const auto& row : table) {
    std::vector<EventRecord> data;
    for (int i = 0; i < 3; ++i) data.push_back({i + 1.0, row.flags[i], "k"});
    const auto curve = kaplan_meier(data);
    for (int i = 0; i < 3; ++i) mismatches += curve.at(i + 1.0) == row.s[i] ? 0 : 1;
  }
  const auto sample = simulate_cohort({ModelSpec(ModelKind::ZeroTruncated, 0.9736, 3.4099, 0.4495), 2000, INFINITY, 3});
  const auto curve = kaplan_meier(sample);
  double ecdf_err = 0.0;
  for (const auto& r : sample) {
    ecdf_err = std::max(ecdf_err, std::abs((1.0 - curve.at(r.time)) - (1.0 - oracle::empirical_survival(sample, r.time))));
  }
  return {mismatches == 0 && ecdf_err <= 1e-12,
          fmt("8 censoring patterns, %.0f mismatches; max |(1 - S) - ECDF| = %.1e", static_cast<double>(mismatches), ecdf_err)};
}

}  // namespace

int main() {
  criterion(1, "ELGD reproduction", elgd_reproduction);
  criterion(2, "theta-default reconciliation", theta_default_reconciliation);
  criterion(3, "Wald CI reconstruction", wald_reconstruction);
  criterion(4, "Parameter recovery", parameter_recovery);
  criterion(5, "Normalization and calculus identities", calculus_identities);
  criterion(6, "Gradient check", gradient_check);
  criterion(7, "KM oracle equivalence", km_oracle);
  std::printf(
      "[N/A ] 8. Not reproducible: the observed-LGD column and the original per-cohort fits need the "
      "proprietary loan data; criteria 4-7 stand in for them\n");
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
