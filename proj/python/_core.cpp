#include "esplab/conditions.hpp"
#include "esplab/data.hpp"
#include "esplab/esp_index.hpp"
#include "esplab/heatmap.hpp"
#include "esplab/readout.hpp"
#include "esplab/reservoir.hpp"
#include "esplab/sweep.hpp"
#include "esplab/task_eval.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>

namespace py = pybind11;
using namespace esplab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// A 1-D array is a univariate series; a 2-D array has one row per step.
Signal to_signal(const Array& a)
{
    if (a.ndim() == 1) {
        const auto n = static_cast<std::size_t>(a.shape(0));
        return Signal::univariate(std::span<const double>{a.data(), n});
    }
    if (a.ndim() == 2) {
        RowMatrix m(a.shape(0), a.shape(1));
        std::copy(a.data(), a.data() + a.size(), m.data());
        return Signal{std::move(m)};
    }
    throw std::invalid_argument("signal must be a 1-D or 2-D array");
}

RowMatrix from_signal(const Signal& s)
{
    return s.steps();
}

EspIndexConfig esp_config(std::size_t p_trials, std::size_t transient, std::size_t horizon, std::uint64_t seed,
                          bool keep_per_step)
{
    EspIndexConfig c;
    c.p_trials = p_trials;
    c.transient = transient;
    c.horizon = horizon;
    c.seed = seed;
    c.keep_per_step = keep_per_step;
    return c;
}

SweepConfig config_from_dict(const std::map<std::string, std::string>& kv)
{
    return SweepConfig::from_key_values({kv.begin(), kv.end()});
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Echo state property diagnostics for reservoir computers";

    py::register_exception<ConstructionError>(m, "ConstructionError", PyExc_RuntimeError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_RuntimeError);

    m.def("spectral_radius", &spectral_radius, py::arg("m"));
    m.def("spectral_norm", &spectral_norm, py::arg("m"));

    py::class_<ReservoirParams>(m, "ReservoirParams")
      .def_static("from_matrices", &ReservoirParams::from_matrices, py::arg("w"), py::arg("w_in"))
      .def_property_readonly("w", &ReservoirParams::w)
      .def_property_readonly("w_in", &ReservoirParams::w_in)
      .def_property_readonly("n_r", &ReservoirParams::n_r)
      .def_property_readonly("n_u", &ReservoirParams::n_u)
      .def_property_readonly("target_rho", &ReservoirParams::target_rho)
      .def_property_readonly("input_scale", &ReservoirParams::input_scale)
      .def_property_readonly("seed", &ReservoirParams::seed);

    m.def("init_reservoir", &init_reservoir, py::arg("n_r"), py::arg("n_u"), py::arg("target_rho"),
          py::arg("input_scale"), py::arg("seed"));
    m.def("step", &step, py::arg("params"), py::arg("x"), py::arg("u"));
    m.def(
      "run_orbit",
      [](const ReservoirParams& p, const State& x0, const Array& u) { return run_orbit(p, x0, to_signal(u)).states(); },
      py::arg("params"), py::arg("x0"), py::arg("signal"),
      "States x(0) .. x(L), one per row.");

    py::class_<EspIndexResult>(m, "EspIndexResult")
      .def_readonly("index", &EspIndexResult::index)
      .def_readonly("per_trial", &EspIndexResult::per_trial)
      .def_readonly("per_step", &EspIndexResult::per_step);

    m.def(
      "esp_index",
      [](const ReservoirParams& p, const Array& u, std::size_t p_trials, std::size_t transient, std::size_t horizon,
         std::uint64_t seed, bool keep_per_step, unsigned threads) {
          const Signal s = to_signal(u);
          py::gil_scoped_release release;
          return esp_index(p, s, esp_config(p_trials, transient, horizon, seed, keep_per_step), threads);
      },
      py::arg("params"), py::arg("signal"), py::arg("p_trials") = 50, py::arg("transient") = 500,
      py::arg("horizon") = 1000, py::arg("seed") = 0, py::arg("keep_per_step") = false, py::arg("threads") = 1);
    m.def("is_esp_empirical", &is_esp_empirical, py::arg("result"), py::arg("tol") = kDefaultEspTolerance);

    py::enum_<SchurStatus>(m, "SchurStatus")
      .value("certified", SchurStatus::certified)
      .value("unknown", SchurStatus::unknown);

    py::class_<SchurCertificate>(m, "SchurCertificate")
      .def_readonly("status", &SchurCertificate::status)
      .def_readonly("d", &SchurCertificate::d)
      .def_readonly("best_norm", &SchurCertificate::best_norm);

    py::class_<InputConditionReport>(m, "InputConditionReport")
      .def_readonly("lhs", &InputConditionReport::lhs)
      .def_readonly("rhs", &InputConditionReport::rhs)
      .def_readonly("holds", &InputConditionReport::holds)
      .def_readonly("c_series", &InputConditionReport::c_series);

    py::class_<ConditionReport>(m, "ConditionReport")
      .def_readonly("necessary_holds", &ConditionReport::necessary_holds)
      .def_readonly("schur", &ConditionReport::schur)
      .def_readonly("input", &ConditionReport::input)
      .def_property_readonly("sufficient_holds", &ConditionReport::sufficient_holds);

    m.def("necessary_condition", &necessary_condition, py::arg("w"));
    m.def("scaled_norm", &scaled_norm, py::arg("w"), py::arg("d"));
    m.def(
      "schur_certificate_search",
      [](const Matrix& w, int max_iters, double eps) { return schur_certificate_search(w, {max_iters, eps}); },
      py::arg("w"), py::arg("max_iters") = 500, py::arg("eps") = 1e-6);
    m.def(
      "input_dependent_sufficient",
      [](const ReservoirParams& p, const Array& u, std::size_t horizon) {
          return input_dependent_sufficient(p, to_signal(u), horizon);
      },
      py::arg("params"), py::arg("signal"), py::arg("horizon"));
    m.def(
      "evaluate_conditions",
      [](const ReservoirParams& p, const Array& u, std::size_t horizon, int max_iters, double eps) {
          return evaluate_conditions(p, to_signal(u), horizon, {max_iters, eps});
      },
      py::arg("params"), py::arg("signal"), py::arg("horizon"), py::arg("max_iters") = 500, py::arg("eps") = 1e-6);

    py::class_<ReadoutWeights>(m, "ReadoutWeights")
      .def(py::init<>())
      .def_readwrite("w_out", &ReadoutWeights::w_out)
      .def_readwrite("lambda_", &ReadoutWeights::lambda);

    m.def("default_lambda_grid", &default_lambda_grid);
    m.def(
      "ridge_fit", [](const Matrix& x, const Matrix& y, double lambda) { return ridge_fit({x, y}, lambda); },
      py::arg("states"), py::arg("targets"), py::arg("lam"));
    m.def(
      "select_lambda",
      [](const Matrix& x, const Matrix& y, const std::vector<double>& grid, double val_fraction) {
          return select_lambda({x, y}, grid, val_fraction);
      },
      py::arg("states"), py::arg("targets"), py::arg("grid") = default_lambda_grid(), py::arg("val_fraction") = 0.2);
    m.def("predict", &predict, py::arg("weights"), py::arg("states"));
    m.def("mse", &mse, py::arg("pred"), py::arg("target"));
    m.def("log10_mse", &log10_mse, py::arg("pred"), py::arg("target"));

    m.def(
      "load_laser", [](const std::filesystem::path& p) { return from_signal(load_laser(p)); }, py::arg("path"));
    m.def(
      "load_sunspot_silso",
      [](const std::filesystem::path& p, const std::string& from, const std::string& to) {
          return from_signal(load_sunspot_silso(p, YearMonth::parse(from), YearMonth::parse(to)));
      },
      py::arg("path"), py::arg("start") = "1749-01", py::arg("end") = "2018-09");

    py::class_<NextStepTask>(m, "NextStepTask")
      .def_property_readonly("train_inputs", [](const NextStepTask& t) { return from_signal(t.train_inputs); })
      .def_property_readonly("train_targets", [](const NextStepTask& t) { return from_signal(t.train_targets); })
      .def_property_readonly("test_inputs", [](const NextStepTask& t) { return from_signal(t.test_inputs); })
      .def_property_readonly("test_targets", [](const NextStepTask& t) { return from_signal(t.test_targets); })
      .def_readonly("washout", &NextStepTask::washout);

    m.def(
      "make_next_step_task",
      [](const Array& series, std::size_t train_len, std::size_t test_len, std::size_t washout) {
          return make_next_step_task(to_signal(series), train_len, test_len, washout);
      },
      py::arg("series"), py::arg("train_len"), py::arg("test_len"), py::arg("washout"));

    py::class_<TrainEvalResult>(m, "TrainEvalResult")
      .def_readonly("weights", &TrainEvalResult::weights)
      .def_readonly("train_mse", &TrainEvalResult::train_mse)
      .def_readonly("test_mse", &TrainEvalResult::test_mse);
    m.def(
      "train_and_evaluate",
      [](const ReservoirParams& p, const NextStepTask& task, const std::vector<double>& grid, double val_fraction) {
          return train_and_evaluate(p, task, {grid, val_fraction});
      },
      py::arg("params"), py::arg("task"), py::arg("lambda_grid") = default_lambda_grid(),
      py::arg("val_fraction") = 0.2);

    py::class_<SweepConfig>(m, "SweepConfig")
      .def(py::init<>())
      .def(py::init(&config_from_dict), py::arg("settings"),
           "Defaults overridden by string key=value settings, as in a config file.")
      .def_readwrite("rho_values", &SweepConfig::rho_values)
      .def_readwrite("scale_values", &SweepConfig::scale_values)
      .def_readwrite("n_seeds", &SweepConfig::n_seeds)
      .def_readwrite("n_r", &SweepConfig::n_r)
      .def_readwrite("base_seed", &SweepConfig::base_seed)
      .def_readwrite("train_len", &SweepConfig::train_len)
      .def_readwrite("test_len", &SweepConfig::test_len)
      .def_readwrite("washout", &SweepConfig::washout)
      .def_readwrite("lambda_grid", &SweepConfig::lambda_grid)
      .def_readwrite("val_fraction", &SweepConfig::val_fraction)
      .def_readwrite("condition_horizon", &SweepConfig::condition_horizon)
      .def_property(
        "esp_p", [](const SweepConfig& c) { return c.esp.p_trials; },
        [](SweepConfig& c, std::size_t v) { c.esp.p_trials = v; })
      .def_property(
        "esp_transient", [](const SweepConfig& c) { return c.esp.transient; },
        [](SweepConfig& c, std::size_t v) { c.esp.transient = v; })
      .def_property(
        "esp_horizon", [](const SweepConfig& c) { return c.esp.horizon; },
        [](SweepConfig& c, std::size_t v) { c.esp.horizon = v; })
      .def_property(
        "schur_max_iters", [](const SweepConfig& c) { return c.schur.max_iters; },
        [](SweepConfig& c, int v) { c.schur.max_iters = v; })
      .def_property(
        "schur_eps", [](const SweepConfig& c) { return c.schur.eps; }, [](SweepConfig& c, double v) { c.schur.eps = v; })
      .def("validate", &SweepConfig::validate)
      .def("to_key_values", &SweepConfig::to_key_values)
      .def(py::self == py::self);

    py::class_<SweepRecord>(m, "SweepRecord")
      .def_readonly("rho", &SweepRecord::rho)
      .def_readonly("input_scale", &SweepRecord::input_scale)
      .def_readonly("seed_index", &SweepRecord::seed_index)
      .def_readonly("esp_index", &SweepRecord::esp_index)
      .def_readonly("necessary_holds", &SweepRecord::necessary_holds)
      .def_readonly("schur_status", &SweepRecord::schur_status)
      .def_readonly("input_condition_holds", &SweepRecord::input_condition_holds)
      .def_readonly("lambda_used", &SweepRecord::lambda_used)
      .def_readonly("train_mse", &SweepRecord::train_mse)
      .def_readonly("test_mse", &SweepRecord::test_mse)
      .def_readonly("error", &SweepRecord::error)
      .def("__repr__", &format_record);

    py::class_<CellSummary>(m, "CellSummary")
      .def_readonly("rho", &CellSummary::rho)
      .def_readonly("input_scale", &CellSummary::input_scale)
      .def_readonly("n_ok", &CellSummary::n_ok)
      .def_readonly("n_failed", &CellSummary::n_failed)
      .def_readonly("mean_esp_index", &CellSummary::mean_esp_index)
      .def_readonly("mean_train_mse", &CellSummary::mean_train_mse)
      .def_readonly("mean_test_mse", &CellSummary::mean_test_mse)
      .def_readonly("mean_log10_test_mse", &CellSummary::mean_log10_test_mse)
      .def_readonly("necessary_all", &CellSummary::necessary_all)
      .def_readonly("sufficient_all", &CellSummary::sufficient_all);

    py::class_<CellGrid>(m, "CellGrid")
      .def_readonly("rho_values", &CellGrid::rho_values)
      .def_readonly("scale_values", &CellGrid::scale_values)
      .def_readonly("cells", &CellGrid::cells)
      .def("at", &CellGrid::at, py::arg("rho_index"), py::arg("scale_index"))
      .def("mean_esp", &CellGrid::mean_esp);

    py::class_<SweepResults>(m, "SweepResults")
      .def_readonly("config", &SweepResults::config)
      .def_readonly("records", &SweepResults::records)
      .def("aggregate", &SweepResults::aggregate);

    m.def(
      "run_sweep",
      [](const SweepConfig& cfg, const Array& series, const NextStepTask& task, unsigned threads) {
          const Signal s = to_signal(series);
          py::gil_scoped_release release;
          return run_sweep(cfg, s, task, {.threads = threads});
      },
      py::arg("config"), py::arg("series"), py::arg("task"), py::arg("threads") = 1);
    m.def("normalize_index_grid", &normalize_index_grid, py::arg("means"));
    m.def("write_results", &write_results, py::arg("results"), py::arg("path"));
    m.def("read_results", &read_results, py::arg("path"), py::arg("tolerate_truncated_tail") = false);

    m.def(
      "render_heatmap",
      [](const SweepResults& r, const std::string& quantity, double mse_min, double mse_max) {
          HeatmapOptions opts;
          opts.log10_mse_min = mse_min;
          opts.log10_mse_max = mse_max;
          return render_heatmap(r, parse_heatmap_quantity(quantity), opts);
      },
      py::arg("results"), py::arg("quantity") = "esp_index_normalized", py::arg("mse_min") = -5.0,
      py::arg("mse_max") = 0.0);
}
