#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "lcrisk/distributions.hpp"
#include "lcrisk/inference.hpp"
#include "lcrisk/models.hpp"
#include "lcrisk/nonparametric.hpp"
#include "lcrisk/report.hpp"
#include "lcrisk/simulation.hpp"

namespace py = pybind11;
using namespace lcrisk;

namespace {

using Records = std::vector<EventRecord>;

std::vector<CohortDataset> read_csv_file(const std::string& path, ModelKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw py::value_error("cannot open " + path);
  return read_events_csv(in, kind);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Latent competing-risk survival models for loan default and recovery times";

  py::register_exception<NoEventsError>(m, "NoEventsError", PyExc_ValueError);
  py::register_exception<SingularInformationError>(m, "SingularInformationError", PyExc_ArithmeticError);
  py::register_exception<CsvError>(m, "CsvError", PyExc_ValueError);

  py::enum_<ModelKind>(m, "ModelKind")
      .value("ZeroTruncated", ModelKind::ZeroTruncated)
      .value("PromotionTime", ModelKind::PromotionTime);
  m.def("parse_model_kind", [](const std::string& s) { return parse_model_kind(s); });

  py::enum_<Param>(m, "Param").value("Theta", Param::Theta).value("Shape", Param::Shape).value("Scale", Param::Scale);

  py::class_<WeibullParams>(m, "WeibullParams")
      .def(py::init<double, double>(), py::arg("shape"), py::arg("scale"))
      .def_static("from_rate", &WeibullParams::from_rate, py::arg("shape"), py::arg("rate"))
      .def_property_readonly("shape", &WeibullParams::shape)
      .def_property_readonly("scale", &WeibullParams::scale)
      .def("__repr__", [](const WeibullParams& p) {
        return "WeibullParams(shape=" + std::to_string(p.shape()) + ", scale=" + std::to_string(p.scale()) + ")";
      });

  m.def("weibull_pdf", &weibull_pdf, py::arg("t"), py::arg("params"));
  m.def("weibull_log_pdf", &weibull_log_pdf, py::arg("t"), py::arg("params"));
  m.def("weibull_cdf", &weibull_cdf, py::arg("t"), py::arg("params"));
  m.def("weibull_survival", &weibull_survival, py::arg("t"), py::arg("params"));
  m.def("poisson_pmf", &poisson_pmf, py::arg("m"), py::arg("theta"));
  m.def("poisson_log_pmf", &poisson_log_pmf, py::arg("m"), py::arg("theta"));
  m.def("zt_poisson_pmf", &zt_poisson_pmf, py::arg("m"), py::arg("theta"));
  m.def("zt_poisson_log_pmf", &zt_poisson_log_pmf, py::arg("m"), py::arg("theta"));
  m.def("zt_poisson_mean", &zt_poisson_mean, py::arg("theta"));

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<ModelKind, double, double, double>(), py::arg("kind"), py::arg("theta"), py::arg("shape"),
           py::arg("scale"))
      .def_property_readonly("kind", &ModelSpec::kind)
      .def_property_readonly("theta", &ModelSpec::theta)
      .def_property_readonly("shape", &ModelSpec::shape)
      .def_property_readonly("scale", &ModelSpec::scale)
      .def_property_readonly("weibull", &ModelSpec::weibull)
      .def(py::self == py::self)
      .def("__repr__", [](const ModelSpec& s) {
        return "ModelSpec(" + std::string(to_string(s.kind())) + ", theta=" + std::to_string(s.theta()) +
               ", shape=" + std::to_string(s.shape()) + ", scale=" + std::to_string(s.scale()) + ")";
      });

  m.def("density", &density, py::arg("t"), py::arg("model"));
  m.def("survival", &survival, py::arg("t"), py::arg("model"));
  m.def("ztpw_density", &ztpw_density, py::arg("t"), py::arg("model"));
  m.def("ztpw_survival", &ztpw_survival, py::arg("t"), py::arg("model"));
  m.def("ptm_density", &ptm_density, py::arg("t"), py::arg("model"));
  m.def("ptm_survival", &ptm_survival, py::arg("t"), py::arg("model"));
  m.def("cure_fraction", &cure_fraction, py::arg("model"));
  m.def("elgd_at_horizon", &elgd_at_horizon, py::arg("model"), py::arg("horizon"));

  py::class_<EventRecord>(m, "EventRecord")
      .def(py::init([](double time, int event, std::string cohort) {
             EventRecord r{time, event, std::move(cohort)};
             validate_record(r);
             return r;
           }),
           py::arg("time"), py::arg("event") = 1, py::arg("cohort") = "all")
      .def_readonly("time", &EventRecord::time)
      .def_readonly("event", &EventRecord::event)
      .def_readonly("cohort", &EventRecord::cohort)
      .def(py::self == py::self)
      .def("__repr__", [](const EventRecord& r) {
        return "EventRecord(time=" + std::to_string(r.time) + ", event=" + std::to_string(r.event) + ", cohort='" +
               r.cohort + "')";
      });

  m.def("loglik", [](const Records& d, const ModelSpec& s) { return loglik(d, s); }, py::arg("data"),
        py::arg("model"));
  m.def("score", [](const Records& d, const ModelSpec& s) { return score(d, s); }, py::arg("data"), py::arg("model"));
  m.def(
      "observed_information",
      [](const Records& d, const ModelSpec& s, double step) { return observed_information(d, s, step); },
      py::arg("data"), py::arg("model"), py::arg("relative_step") = 1e-5);

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("gradient_tolerance", &FitOptions::gradient_tolerance)
      .def_readwrite("max_iterations", &FitOptions::max_iterations)
      .def_readwrite("max_halvings", &FitOptions::max_halvings)
      .def_readwrite("hessian_step", &FitOptions::hessian_step)
      .def_readwrite("objective_noise", &FitOptions::objective_noise)
      .def_readwrite("confidence_level", &FitOptions::confidence_level);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("se", &FitResult::se)
      .def_readonly("ci_low", &FitResult::ci_low)
      .def_readonly("ci_high", &FitResult::ci_high)
      .def_readonly("p_value", &FitResult::p_value)
      .def_readonly("information", &FitResult::information)
      .def_readonly("loglik", &FitResult::loglik)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("gradient_norm", &FitResult::gradient_norm)
      .def_readonly("n", &FitResult::n)
      .def_readonly("events", &FitResult::events)
      .def_readonly("message", &FitResult::message)
      .def_readonly("trace", &FitResult::trace);

  py::class_<WaldRow>(m, "WaldRow")
      .def_property_readonly("name", [](const WaldRow& r) { return std::string(param_name(r.param)); })
      .def_readonly("param", &WaldRow::param)
      .def_readonly("estimate", &WaldRow::estimate)
      .def_readonly("se", &WaldRow::se)
      .def_readonly("ci_low", &WaldRow::ci_low)
      .def_readonly("ci_high", &WaldRow::ci_high)
      .def_readonly("z", &WaldRow::z)
      .def_readonly("p_value", &WaldRow::p_value);

  m.def(
      "fit_mle",
      [](const Records& d, ModelKind kind, const FitOptions& o) {
        py::gil_scoped_release release;
        return fit_mle(d, kind, o);
      },
      py::arg("data"), py::arg("kind"), py::arg("options") = FitOptions{});
  m.def(
      "wald_summary", [](const FitResult& f, double level) { return wald_summary(f, {0.0, 0.0, 0.0}, level); },
      py::arg("fit"), py::arg("confidence_level") = 0.95);
  m.def("wald_row", &wald_row, py::arg("param"), py::arg("estimate"), py::arg("se"), py::arg("null_value") = 0.0,
        py::arg("confidence_level") = 0.95);
  m.def("format_p_value", &format_p_value, py::arg("p"));

  py::class_<KmCurve>(m, "KmCurve")
      .def_readonly("times", &KmCurve::times)
      .def_readonly("survival", &KmCurve::survival)
      .def_readonly("at_risk", &KmCurve::at_risk)
      .def_readonly("events", &KmCurve::events)
      .def("at", &KmCurve::at, py::arg("t"))
      .def("__len__", [](const KmCurve& c) { return c.times.size(); });
  m.def("kaplan_meier", [](const Records& d) { return kaplan_meier(d); }, py::arg("data"));

  py::class_<OverlayRow>(m, "OverlayRow")
      .def_readonly("t", &OverlayRow::t)
      .def_readonly("km", &OverlayRow::km)
      .def_readonly("model", &OverlayRow::model);
  m.def(
      "overlay_export",
      [](const KmCurve& c, const ModelSpec& s, const std::vector<double>& grid) { return overlay_export(c, s, grid); },
      py::arg("curve"), py::arg("model"), py::arg("grid"));

  m.def(
      "simulate_cohort",
      [](const ModelSpec& model, std::size_t n, double horizon, std::uint64_t seed, std::string cohort) {
        const SimConfig cfg{model, n, horizon, seed, std::move(cohort)};
        py::gil_scoped_release release;
        return simulate_cohort(cfg);
      },
      py::arg("model"), py::arg("n"), py::arg("horizon") = std::numeric_limits<double>::infinity(),
      py::arg("seed") = 0, py::arg("cohort") = "sim");

  py::class_<CohortDataset>(m, "CohortDataset")
      .def_readonly("cohort", &CohortDataset::cohort)
      .def_readonly("records", &CohortDataset::records)
      .def_readonly("kind", &CohortDataset::kind);
  m.def("read_events_csv", &read_csv_file, py::arg("path"), py::arg("kind") = ModelKind::PromotionTime);
  m.def(
      "parse_events_csv",
      [](const std::string& text, ModelKind kind) {
        std::istringstream in(text);
        return read_events_csv(in, kind);
      },
      py::arg("text"), py::arg("kind") = ModelKind::PromotionTime);
  m.def(
      "format_events_csv",
      [](const Records& d) {
        std::ostringstream out;
        write_events_csv(out, d);
        return out.str();
      },
      py::arg("records"));
  m.def("detect_kind", [](const Records& d) { return detect_kind(d); }, py::arg("records"));
  m.def("observed_lgd", [](const Records& d, double h) { return observed_lgd(d, h); }, py::arg("records"),
        py::arg("horizon"));

  py::class_<CohortFit>(m, "CohortFit")
      .def_readonly("cohort", &CohortFit::cohort)
      .def_readonly("fit", &CohortFit::fit)
      .def_readonly("observed_lgd", &CohortFit::observed_lgd);
  py::class_<SummaryRow>(m, "SummaryRow")
      .def_readonly("cohort", &SummaryRow::cohort)
      .def_readonly("theta_default", &SummaryRow::theta_default)
      .def_readonly("theta_recovery", &SummaryRow::theta_recovery)
      .def_readonly("observed_lgd_percent", &SummaryRow::observed_lgd_percent)
      .def_readonly("elgd_percent", &SummaryRow::elgd_percent)
      .def_readonly("converged", &SummaryRow::converged)
      .def_readonly("note", &SummaryRow::note);

  m.def(
      "fit_cohorts",
      [](const std::vector<CohortDataset>& cohorts, double horizon, const FitOptions& o) {
        py::gil_scoped_release release;
        return fit_cohorts(cohorts, horizon, o);
      },
      py::arg("cohorts"), py::arg("horizon"), py::arg("options") = FitOptions{});
  m.def("build_summary_table", [](const std::vector<CohortFit>& f, double h) { return build_summary_table(f, h); },
        py::arg("fits"), py::arg("horizon"));
  m.def("render_fit_text", &render_fit_text, py::arg("fit"));
  m.def("render_fit_json", [](const std::vector<CohortFit>& f, double h) { return render_fit_json(f, h); },
        py::arg("fits"), py::arg("horizon"));
  m.def("render_summary_text", [](const std::vector<SummaryRow>& r, double h) { return render_summary_text(r, h); },
        py::arg("rows"), py::arg("horizon"));
  m.def("render_summary_json", [](const std::vector<SummaryRow>& r, double h) { return render_summary_json(r, h); },
        py::arg("rows"), py::arg("horizon"));
}
