#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lcrisk/report.hpp"
#include "lcrisk/simulation.hpp"
#include "portfolio_fits.hpp"

using namespace lcrisk;

namespace {

std::vector<CohortDataset> parse(const std::string& text) {
  std::istringstream in(text);
  return read_events_csv(in);
}

CsvError parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const CsvError& e) {
    return e;
  }
  FAIL("expected a CsvError");
  return CsvError(CsvErrorKind::MalformedRow, 0, "");
}

CohortFit converged_fit(const std::string& cohort, ModelKind kind, double theta, double shape, double scale) {
  FitResult f(ModelSpec(kind, theta, shape, scale));
  f.converged = true;
  return {cohort, f, std::nullopt};
}

}  // namespace

TEST_CASE("minimal CSV") {
  const auto cohorts = parse("time,event,cohort\n3.5,1,2010\n24,0,2010\n");
  REQUIRE(cohorts.size() == 1);
  CHECK(cohorts[0].cohort == "2010");
  REQUIRE(cohorts[0].records.size() == 2);
  CHECK(cohorts[0].records[0] == EventRecord{3.5, 1, "2010"});
  CHECK(cohorts[0].records[1] == EventRecord{24.0, 0, "2010"});
}

TEST_CASE("cohorts are sorted by label and keep their row order") {
  const auto cohorts = parse("time,event,cohort\r\n5,1,b\r\n1,1,a\r\n\r\n4,0,b\r\n2,1,a\r\n");
  REQUIRE(cohorts.size() == 2);
  CHECK(cohorts[0].cohort == "a");
  CHECK(cohorts[0].records[0].time == 1.0);
  CHECK(cohorts[0].records[1].time == 2.0);
  CHECK(cohorts[1].records[0].time == 5.0);
  CHECK(cohorts[1].records[1].time == 4.0);

  const auto unlabeled = parse("time,event\n1,1\n2,0\n");
  REQUIRE(unlabeled.size() == 1);
  CHECK(unlabeled[0].cohort == "all");
}

TEST_CASE("each malformed input is a distinct error naming the line") {
  auto e = parse_error("time,event,cohort\n1,1,a\n2,2,a\n");
  CHECK(e.kind() == CsvErrorKind::BadEventFlag);
  CHECK(e.line() == 3);
  CHECK(std::string(e.what()).find("line 3") != std::string::npos);

  e = parse_error("1,1,a\n");
  CHECK(e.kind() == CsvErrorKind::MissingHeader);
  CHECK(e.line() == 1);
  CHECK(parse_error("").kind() == CsvErrorKind::MissingHeader);

  e = parse_error("time,event,cohort\nabc,1,a\n");
  CHECK(e.kind() == CsvErrorKind::NonNumericTime);
  CHECK(e.line() == 2);
  CHECK(parse_error("time,event,cohort\n1.5x,1,a\n").kind() == CsvErrorKind::NonNumericTime);
  CHECK(parse_error("time,event,cohort\ninf,1,a\n").kind() == CsvErrorKind::NonNumericTime);

  e = parse_error("time,event,cohort\n1,1,a\n0,1,a\n");
  CHECK(e.kind() == CsvErrorKind::NonPositiveTime);
  CHECK(e.line() == 3);
  CHECK(parse_error("time,event,cohort\n-2,1,a\n").kind() == CsvErrorKind::NonPositiveTime);

  CHECK(parse_error("time,event,cohort\n1,1\n").kind() == CsvErrorKind::MalformedRow);
  CHECK(parse_error("time,event,cohort\n1,yes,a\n").kind() == CsvErrorKind::BadEventFlag);
}

TEST_CASE("simulated cohort survives a CSV round trip exactly") {
  const ModelSpec m(ModelKind::PromotionTime, 3.0614, 1.0647, 81.3458);
  const auto records = simulate_cohort({m, 20000, 24.0, 5, "2010"});
  std::stringstream io;
  write_events_csv(io, records);
  const auto back = read_events_csv(io);
  REQUIRE(back.size() == 1);
  CHECK(back[0].records == records);
}

TEST_CASE("kind detection and observed LGD") {
  const std::vector<EventRecord> uncensored{{1.0, 1, "a"}, {2.0, 1, "a"}};
  const std::vector<EventRecord> censored{{1.0, 1, "a"}, {24.0, 0, "a"}, {24.0, 0, "a"}, {30.0, 0, "a"}};
  CHECK(detect_kind(uncensored) == ModelKind::ZeroTruncated);
  CHECK(detect_kind(censored) == ModelKind::PromotionTime);
  CHECK(observed_lgd(censored, 24.0) == doctest::Approx(0.75));
  CHECK_FALSE(observed_lgd(censored, 36.0).has_value());
}

TEST_CASE("summary rows follow the cross-cohort column mappings") {
  std::vector<CohortFit> fits;
  fits.push_back(converged_fit("2008", ModelKind::ZeroTruncated, 1.1361, 2.7973, 0.3315));
  fits.push_back(converged_fit("2011", ModelKind::PromotionTime, 0.8044, 1.2417, 24.2691));
  fits.push_back(converged_fit("2008", ModelKind::PromotionTime, 0.3418, 1.1430, 14.3917));
  const auto rows = build_summary_table(fits, 24.0);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].cohort == "2008");
  CHECK(std::abs(*rows[0].theta_default - 1.6734) <= 0.00005);
  CHECK(*rows[0].theta_recovery == 0.3418);
  CHECK(std::abs(*rows[0].elgd_percent - 75.200) <= 0.05);
  CHECK(rows[1].cohort == "2011");
  CHECK_FALSE(rows[1].theta_default.has_value());
  CHECK(std::abs(*rows[1].elgd_percent - 60.386) <= 0.05);
  CHECK_FALSE(rows[1].observed_lgd_percent.has_value());

  CHECK(build_summary_table(std::span<const CohortFit>{}, 24.0).empty());
}

TEST_CASE("every reproducible summary cell comes back from the reference fits") {
  std::vector<CohortFit> fits;
  for (const auto& c : portfolio::kDefault) {
    fits.push_back(converged_fit(std::string(c.cohort), ModelKind::ZeroTruncated, c.theta.estimate, c.shape.estimate,
                                 c.scale.estimate));
  }
  for (const auto& c : portfolio::kRecovery) {
    fits.push_back(converged_fit(std::string(c.cohort), ModelKind::PromotionTime, c.theta.estimate,
                                 c.shape.estimate, c.scale.estimate));
  }
  const auto rows = build_summary_table(fits, portfolio::kRecoveryHorizon);
  REQUIRE(rows.size() == 6);  // 2006..2011
  for (std::size_t i = 0; i < portfolio::kDefault.size(); ++i) {
    const auto& row = rows[i];
    CHECK(row.cohort == portfolio::kDefault[i].cohort);
    CHECK(std::abs(*row.theta_default - portfolio::kThetaDefaultColumn[i]) <= 0.005);
  }
  for (std::size_t i = 0; i < portfolio::kRecovery.size(); ++i) {
    const auto& row = rows[i + 1];
    CHECK(row.cohort == portfolio::kRecovery[i].cohort);
    CHECK(*row.theta_recovery == portfolio::kRecovery[i].theta.estimate);
    CHECK(std::abs(*row.elgd_percent - portfolio::kElgdPercentColumn[i]) <= 0.05);
  }
  const std::string text = render_summary_text(rows, 24.0);
  CHECK(text.find("3.0820") != std::string::npos);
  CHECK(text.find("48.165") != std::string::npos);
  const auto doc = nlohmann::json::parse(render_summary_json(rows, 24.0));
  CHECK(doc["rows"].size() == 6);
  CHECK(doc["rows"][0]["theta_recovery"].is_null());
}

TEST_CASE("unconverged fits are flagged, not dropped") {
  FitResult f(ModelSpec(ModelKind::PromotionTime, 0.5, 1.0, 10.0));
  f.message = "iteration limit reached";
  const std::vector<CohortFit> fits{{"x", f, std::nullopt}};
  const auto rows = build_summary_table(fits, 24.0);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].converged);
  CHECK(rows[0].note.find("iteration limit") != std::string::npos);
  CHECK(render_summary_text(rows, 24.0).find("did not converge") != std::string::npos);
  CHECK(render_fit_text(fits[0]).find("NOT CONVERGED") != std::string::npos);
}

TEST_CASE("fit rendering has the Wald column set") {
  const ModelSpec m(ModelKind::PromotionTime, 0.8044, 1.2417, 24.2691);
  CohortDataset ds{"2011", simulate_cohort({m, 3000, 24.0, 1, "2011"}), ModelKind::PromotionTime};
  const std::vector<CohortDataset> cohorts{ds};
  const auto fits = fit_cohorts(cohorts, 24.0);
  REQUIRE(fits.size() == 1);
  REQUIRE(fits[0].fit.converged);
  REQUIRE(fits[0].observed_lgd.has_value());

  const std::string text = render_fit_text(fits[0]);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  std::istringstream header(line);
  std::vector<std::string> columns;
  for (std::string w; header >> w;) columns.push_back(w);
  CHECK(columns == std::vector<std::string>{"Parameter", "Estimate", "SE", "LI", "UI", "p-value"});
  std::vector<std::string> names;
  while (std::getline(lines, line)) {
    std::istringstream row(line);
    std::string name;
    if (row >> name) names.push_back(name);
  }
  CHECK(names == std::vector<std::string>{"gamma", "beta", "theta"});

  const auto doc = nlohmann::json::parse(render_fit_json(fits, 24.0));
  const auto& params = doc["cohorts"][0]["parameters"];
  REQUIRE(params.size() == 3);
  for (const auto& p : params) {
    CHECK(p.size() == 6);
    CHECK(p.contains("se"));
    CHECK(p.contains("p_value"));
  }
}
