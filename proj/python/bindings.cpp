#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "holowb/crlb.hpp"
#include "holowb/error.hpp"
#include "holowb/grows.hpp"
#include "holowb/harness.hpp"
#include "holowb/holography.hpp"
#include "holowb/recovery.hpp"
#include "holowb/specfun.hpp"
#include "holowb/whml.hpp"

namespace py = pybind11;
using namespace holowb;

namespace {

JMode parse_mode(const std::string& s) {
  if (s == "quadrature") return JMode::quadrature;
  if (s == "approx") return JMode::approx;
  throw py::value_error("j mode must be 'quadrature' or 'approx'");
}

InformationForm parse_form(const std::string& s) {
  if (s == "score_consistent") return InformationForm::score_consistent;
  if (s == "published") return InformationForm::published;
  throw py::value_error("information form must be 'score_consistent' or 'published'");
}

RecoveryContext recovery_context(double amplitude, double phase_step, cplx reference) {
  RecoveryContext ctx;
  ctx.ref_amplitude = amplitude;
  ctx.phase_step = phase_step;
  ctx.reference = reference;
  return ctx;
}

py::dict row_dict(const ResultRow& r) {
  py::dict d;
  d["sweep_var"] = r.sweep_var;
  d["value"] = r.value;
  d["estimator"] = r.estimator;
  d["nmse_db"] = r.nmse_db;
  d["crlb_db"] = r.crlb_db;
  d["trials"] = r.trials;
  d["failures"] = r.failures;
  d["clamps"] = r.clamps;
  return d;
}

}  // namespace

PYBIND11_MODULE(holowb, m) {
  m.doc() = "Holographic wideband channel estimation";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string("[") + to_string(e.code()) + "] " + e.what()).c_str());
    }
  });

  // special functions, vectorized over numpy input
  m.def("bessel_i0", py::vectorize(&specfun::bessel_i0));
  m.def("bessel_i0_scaled", py::vectorize(&specfun::bessel_i0_scaled));
  m.def("log_bessel_i0", py::vectorize(&specfun::log_bessel_i0));
  m.def("bessel_ratio", py::vectorize(&specfun::bessel_ratio), "I1(z) / I0(z)");

  m.def(
      "recover_quadratic",
      [](double e1, double e2, double amplitude, double phase_step, cplx reference) {
        return recover_quadratic(e1, e2, recovery_context(amplitude, phase_step, reference));
      },
      py::arg("e1"), py::arg("e2"), py::arg("amplitude"), py::arg("phase_step"), py::arg("reference") = cplx(1.0, 0.0));
  m.def(
      "recover_geometric",
      [](double e1, double e2, double amplitude, double phase_step, cplx reference) {
        return recover_geometric(e1, e2, recovery_context(amplitude, phase_step, reference));
      },
      py::arg("e1"), py::arg("e2"), py::arg("amplitude"), py::arg("phase_step"), py::arg("reference") = cplx(1.0, 0.0));

  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init([](double carrier_hz, int subcarriers, double symbol_period_s) {
             FrequencyGrid g{carrier_hz, subcarriers, symbol_period_s};
             g.validate();
             return g;
           }),
           py::arg("carrier_hz") = 3.5e9, py::arg("subcarriers") = 132, py::arg("symbol_period_s") = 1.0 / 30e3)
      .def_readonly("carrier_hz", &FrequencyGrid::carrier_hz)
      .def_readonly("subcarriers", &FrequencyGrid::subcarriers)
      .def_readonly("symbol_period_s", &FrequencyGrid::symbol_period_s)
      .def("frequency", &FrequencyGrid::frequency);

  py::class_<ReferenceWave>(m, "ReferenceWave")
      .def_static("with_phase_step", &ReferenceWave::with_phase_step, py::arg("amplitude"), py::arg("phase_step"),
                  py::arg("grid"))
      .def_readonly("amplitude", &ReferenceWave::amplitude)
      .def_readonly("frequency_hz", &ReferenceWave::frequency_hz)
      .def("phase_step", &ReferenceWave::phase_step);

  py::class_<HologramRecord>(m, "HologramRecord")
      .def_readonly("samples_per_symbol", &HologramRecord::samples_per_symbol)
      .def_readonly("times", &HologramRecord::times)
      .def_readonly("intensities", &HologramRecord::intensities)
      .def_readonly("noise_variance", &HologramRecord::noise_variance)
      .def_readonly("reference", &HologramRecord::reference)
      .def("__len__", &HologramRecord::size);

  m.def(
      "sample_holograms",
      [](const CVector& h, const FrequencyGrid& grid, const ReferenceWave& ref, int samples_per_symbol,
         double noise_variance, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return sample_holograms(h, grid, ref, samples_per_symbol, noise_variance, rng);
      },
      py::arg("h"), py::arg("grid"), py::arg("reference"), py::arg("samples_per_symbol"),
      py::arg("noise_variance") = 0.0, py::arg("seed") = 1);
  m.def("max_object_magnitude", &max_object_magnitude);
  m.def("mean_object_power", &mean_object_power);
  m.def("noise_variance_for_snr", &noise_variance_for_snr);

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("h", &Estimate::h)
      .def_readonly("iterations", &Estimate::iterations)
      .def_readonly("log_likelihood", &Estimate::log_likelihood)
      .def_readonly("clamps", &Estimate::clamps)
      .def_readonly("perturbations", &Estimate::perturbations)
      .def_readonly("likelihood_trace", &Estimate::likelihood_trace)
      .def_property_readonly("termination", [](const Estimate& e) { return std::string(to_string(e.termination)); });

  m.def(
      "grows_estimate",
      [](const HologramRecord& record, const FrequencyGrid& grid) {
        return grows_estimate(record, GrowsSettings{record.samples_per_symbol, grid, record.reference});
      },
      py::arg("record"), py::arg("grid"));

  py::class_<LikelihoodContext>(m, "LikelihoodContext")
      .def_static("from_record", &LikelihoodContext::from_record, py::arg("record"), py::arg("grid"))
      .def_readwrite("noise_variance", &LikelihoodContext::noise_variance)
      .def_readonly("basis", &LikelihoodContext::basis)
      .def_readonly("reference", &LikelihoodContext::reference)
      .def_readonly("intensities", &LikelihoodContext::intensities)
      .def("mean", &LikelihoodContext::mean);

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("armijo_alpha", &SolverOptions::armijo_alpha)
      .def_readwrite("reduction", &SolverOptions::reduction)
      .def_readwrite("max_iterations", &SolverOptions::max_iterations)
      .def_readwrite("gradient_tolerance", &SolverOptions::gradient_tolerance)
      .def_readwrite("step_tolerance", &SolverOptions::step_tolerance)
      .def_readwrite("hessian_damping", &SolverOptions::hessian_damping);

  m.def("log_likelihood", &log_likelihood, py::arg("h"), py::arg("ctx"));
  m.def(
      "wirtinger_gradient", [](const CVector& h, const LikelihoodContext& ctx) { return wirtinger_gradient(h, ctx); },
      py::arg("h"), py::arg("ctx"), "dF/dh*");
  m.def(
      "hessian_blocks",
      [](const CVector& h, const LikelihoodContext& ctx) {
        const auto b = hessian_blocks(h, ctx);
        py::dict d;
        d["hh"] = b.hh;
        d["hhc"] = b.hhc;
        d["hch"] = b.hch;
        d["hchc"] = b.hchc;
        return d;
      },
      py::arg("h"), py::arg("ctx"));
  m.def("whml_estimate", &whml_estimate, py::arg("init"), py::arg("ctx"), py::arg("options") = SolverOptions{});

  m.def(
      "j_gamma", [](double gamma, const std::string& mode) { return j_gamma(gamma, parse_mode(mode)); },
      py::arg("gamma"), py::arg("mode") = "quadrature");
  m.def(
      "crlb",
      [](const CVector& h, const LikelihoodContext& ctx, const std::string& mode, const std::string& form) {
        const auto r = crlb_report(h, ctx, parse_mode(mode), parse_form(form));
        py::dict d;
        d["info"] = r.info;
        d["pseudo"] = r.pseudo;
        d["bound"] = r.bound;
        d["nmse_floor_db"] = r.nmse_floor_db;
        return d;
      },
      py::arg("h"), py::arg("ctx"), py::arg("mode") = "quadrature", py::arg("form") = "score_consistent");

  py::class_<Scenario>(m, "Scenario")
      .def_static(
          "from_json", [](const std::string& text) { return scenario_from_json(nlohmann::json::parse(text)); },
          py::arg("text"))
      .def_static("load", &load_scenario, py::arg("path"))
      .def_readwrite("trials", &Scenario::trials)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("snr_db", &Scenario::snr_db)
      .def_readwrite("k_factor", &Scenario::k_factor)
      .def_readwrite("samples_per_symbol", &Scenario::samples_per_symbol)
      .def_readwrite("fixed_channel", &Scenario::fixed_channel)
      .def_readwrite("run_grows", &Scenario::run_grows)
      .def_readwrite("run_whml", &Scenario::run_whml)
      .def_readwrite("run_crlb", &Scenario::run_crlb)
      .def_readwrite("sweep_variable", &Scenario::sweep_variable)
      .def_readwrite("sweep_values", &Scenario::sweep_values)
      .def_property_readonly("subcarriers", [](const Scenario& s) { return s.grid.subcarriers; })
      .def("effective_samples", &Scenario::effective_samples)
      .def("warnings", &Scenario::warnings);

  m.def(
      "run_sweep",
      [](const Scenario& s, int workers) {
        std::vector<ResultRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_sweep(s, {workers, nullptr});
        }
        py::list out;
        for (const auto& r : rows) out.append(row_dict(r));
        return out;
      },
      py::arg("scenario"), py::arg("workers") = 1);
  m.def(
      "sweep_csv",
      [](const Scenario& s, int workers) {
        std::ostringstream out;
        {
          py::gil_scoped_release release;
          write_csv(out, run_sweep(s, {workers, nullptr}));
        }
        return out.str();
      },
      py::arg("scenario"), py::arg("workers") = 1);
}
