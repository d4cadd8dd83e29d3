#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "revealed/aggregation.hpp"
#include "revealed/estimation.hpp"
#include "revealed/normal.hpp"
#include "revealed/projection.hpp"
#include "revealed/simulate.hpp"
#include "revealed/structure.hpp"
#include "revealed/types.hpp"

namespace py = pybind11;

namespace {

using revealed::Index;
using revealed::Mask;
using revealed::MatrixXd;
using revealed::VectorXd;

revealed::Mode mode_of(const std::string& name) {
  if (name == "binary") return revealed::Mode::binary;
  if (name == "continuous") return revealed::Mode::continuous;
  throw revealed::usage_error("unknown mode '" + name +
                              "' (binary or continuous)");
}

// Panels built from arrays get synthetic ids; the library only uses them in
// error messages.
revealed::ForecastPanel panel_of(const MatrixXd& values, const Mask& present,
                                 const std::string& mode,
                                 const std::optional<VectorXd>& outcomes) {
  revealed::ForecastPanel p;
  p.mode = mode_of(mode);
  p.grid = revealed::MaskedGrid(values, present);
  for (Index k = 0; k < values.rows(); ++k)
    p.event_ids.push_back("e" + std::to_string(k));
  for (Index j = 0; j < values.cols(); ++j)
    p.forecaster_ids.push_back("f" + std::to_string(j));
  if (outcomes) p.outcomes = *outcomes;
  p.validate();
  return p;
}

py::dict projection_dict(const revealed::ProjectionResult& r) {
  py::dict d;
  d["sigma"] = r.sigma;
  d["kappa"] = r.kappa;
  d["iterations"] = r.iterations;
  d["residual"] = r.residual;
  d["condition_number"] = r.condition;
  d["min_eigenvalue_h"] = r.min_eigenvalue;
  d["objective"] = r.objective;
  return d;
}

}  // namespace

PYBIND11_MODULE(_revealed, m) {
  m.doc() =
      "Forecast aggregation through revealed information structures: "
      "estimate how forecasters' information overlaps, project the estimate "
      "onto the coherent condition-bounded set, and aggregate as if "
      "conditioning on everything the panel jointly knows.";

  static py::exception<revealed::error> base_exc(m, "Error");
  py::register_exception<revealed::usage_error>(m, "UsageError", base_exc);
  py::register_exception<revealed::data_error>(m, "DataError", base_exc);
  py::register_exception<revealed::contract_error>(m, "ContractError",
                                                   base_exc);
  py::register_exception<revealed::numerical_error>(m, "NumericalError",
                                                    base_exc);

  m.def("norm_cdf", &revealed::norm_cdf, py::arg("x"),
        "Standard normal distribution function.");
  m.def("norm_ppf", &revealed::norm_ppf, py::arg("p"),
        "Standard normal quantile function.");

  m.def(
      "pairwise_covariance",
      [](const MatrixXd& values, const Mask& present) {
        const revealed::UnconstrainedEstimate e =
            revealed::pairwise_covariance(values, present);
        return py::make_tuple(e.s, e.pair_counts);
      },
      py::arg("values"), py::arg("present"),
      "Pairwise-complete sample covariance and the per-pair event counts.");

  m.def("probit_sigma", &revealed::probit_sigma, py::arg("score_cov"),
        "Map a probit-score covariance onto the information-variable scale.");

  m.def(
      "prepare",
      [](const MatrixXd& values, const Mask& present, const std::string& mode,
         double censor_floor, double censor_ceiling) {
        const revealed::PipelineInputs in = revealed::prepare_pipeline(
            panel_of(values, present, mode, std::nullopt), censor_floor,
            censor_ceiling);
        py::dict d;
        d["s"] = in.estimate.s;
        d["pair_counts"] = in.estimate.pair_counts;
        d["z_values"] = in.z.values;
        d["z_present"] = in.z.present;
        d["clamp_count"] = in.clamp_count;
        return d;
      },
      py::arg("values"), py::arg("present"), py::arg("mode") = "binary",
      py::arg("censor_floor") = 0.001, py::arg("censor_ceiling") = 0.999,
      "Everything upstream of the projection: the unconstrained "
      "information-scale covariance and the scoring variables.");

  m.def(
      "project",
      [](const MatrixXd& s, double kappa, double epsilon,
         Index max_iterations) {
        revealed::ProjectionConfig config;
        config.kappa = kappa;
        config.epsilon = epsilon;
        config.max_iterations = max_iterations;
        return projection_dict(revealed::project_lse(s, config));
      },
      py::arg("s"), py::arg("kappa") = 100.0, py::arg("epsilon") = 1e-5,
      py::arg("max_iterations") = 10000,
      "Project an unconstrained estimate onto the coherent set with the "
      "given condition-number bound.");

  m.def(
      "select_kappa",
      [](const MatrixXd& s, const MatrixXd& z_values, const Mask& z_present,
         double kappa_min, double kappa_max, Index count, bool log_spaced,
         double epsilon) {
        revealed::UnconstrainedEstimate est;
        est.s = s;
        revealed::KappaGrid grid{kappa_min, kappa_max, count, log_spaced};
        const revealed::KappaSelection sel = revealed::select_kappa(
            est, revealed::MaskedGrid(z_values, z_present), grid, epsilon);
        py::dict d;
        d["chosen"] = sel.chosen;
        std::vector<double> kappas, scores;
        std::vector<bool> ok;
        for (const revealed::KappaCandidate& c : sel.candidates) {
          kappas.push_back(c.kappa);
          scores.push_back(c.score);
          ok.push_back(c.ok);
        }
        d["kappas"] = kappas;
        d["scores"] = scores;
        d["ok"] = ok;
        d["projection"] = projection_dict(sel.projection);
        return d;
      },
      py::arg("s"), py::arg("z_values"), py::arg("z_present"),
      py::arg("kappa_min") = 10.0, py::arg("kappa_max") = 1000.0,
      py::arg("count") = 100, py::arg("log_spaced") = true,
      py::arg("epsilon") = 1e-5,
      "Grid search for the condition bound by conditional log-likelihood.");

  m.def(
      "aggregate",
      [](const MatrixXd& values, const Mask& present, const std::string& mode,
         const MatrixXd& sigma, const std::vector<std::string>& methods,
         double censor_floor, double censor_ceiling) {
        revealed::ForecastPanel panel =
            panel_of(values, present, mode, std::nullopt);
        if (panel.mode == revealed::Mode::binary)
          panel = revealed::censor(panel, censor_floor, censor_ceiling);
        std::vector<revealed::Method> parsed;
        if (methods.empty())
          parsed = revealed::default_methods(panel.mode);
        else
          for (const std::string& name : methods)
            parsed.push_back(revealed::parse_method(name));
        const revealed::PanelAggregates agg = revealed::aggregate_panel(
            panel, revealed::InformationStructure(sigma), parsed);
        py::dict d;
        std::vector<std::string> names;
        for (revealed::Method mm : agg.methods)
          names.push_back(revealed::method_name(mm));
        d["methods"] = names;
        d["values"] = agg.values;
        d["variance_clamps"] = agg.variance_clamps;
        return d;
      },
      py::arg("values"), py::arg("present"), py::arg("mode"), py::arg("sigma"),
      py::arg("methods") = std::vector<std::string>{},
      py::arg("censor_floor") = 0.001, py::arg("censor_ceiling") = 0.999,
      "Aggregate a panel with the revealed method and baselines under the "
      "given structure (one column per method).");

  m.def(
      "conditional_z0",
      [](const MatrixXd& sigma, const VectorXd& z,
         const std::vector<Index>& subset, bool allow_singular) {
        const revealed::ConditionalZ0 c =
            subset.empty()
                ? revealed::conditional_z0(revealed::InformationStructure(sigma),
                                           z, allow_singular)
                : revealed::conditional_z0(revealed::InformationStructure(sigma),
                                           z, subset, allow_singular);
        return py::make_tuple(c.mean, c.variance);
      },
      py::arg("sigma"), py::arg("z"), py::arg("subset") = std::vector<Index>{},
      py::arg("allow_singular") = false,
      "Mean and variance of the outcome variable given the listed "
      "forecasters' information variables (all of them when subset is "
      "empty).");

  m.def("min_eigenvalue_h",
        [](const MatrixXd& sigma) {
          return revealed::min_eigenvalue_h(
              revealed::InformationStructure(sigma));
        },
        py::arg("sigma"),
        "Smallest eigenvalue of the bordered extension; >= 0 means the "
        "structure is realizable.");

  m.def("condition_number_h",
        [](const MatrixXd& sigma) {
          return revealed::condition_number(
              revealed::extend(revealed::InformationStructure(sigma)).omega);
        },
        py::arg("sigma"),
        "Condition number of the bordered extension.");

  m.def(
      "simulate",
      [](const MatrixXd& sigma, Index events, const std::string& mode,
         std::uint64_t seed, double threshold, double prior_mean,
         double prior_sd) {
        const revealed::Mode parsed = mode_of(mode);
        const revealed::LinkModel link =
            parsed == revealed::Mode::binary
                ? revealed::LinkModel::binary(
                      VectorXd::Constant(events, threshold))
                : revealed::LinkModel::continuous(
                      VectorXd::Constant(events, prior_mean),
                      prior_sd * prior_sd);
        const revealed::ForecastPanel p = revealed::simulate_panel(
            revealed::InformationStructure(sigma), link, events, seed);
        py::dict d;
        d["values"] = p.grid.values;
        d["outcomes"] = *p.outcomes;
        return d;
      },
      py::arg("sigma"), py::arg("events"), py::arg("mode") = "binary",
      py::arg("seed") = 0, py::arg("threshold") = 0.0,
      py::arg("prior_mean") = 0.0, py::arg("prior_sd") = 1.0,
      "Calibrated synthetic panel drawn from the given structure.");

  m.def(
      "block_sigma",
      [](const std::vector<Index>& block_sizes,
         const std::vector<double>& shared, const VectorXd& private_var) {
        return revealed::make_block_sigma(block_sizes, shared, private_var)
            .sigma();
      },
      py::arg("block_sizes"), py::arg("shared"), py::arg("private_var"),
      "Coherent structure with block-shared and private information.");

  m.def(
      "nested_sigma",
      [](const VectorXd& delta) {
        return revealed::make_nested_sigma(delta).sigma();
      },
      py::arg("delta"),
      "Coherent structure where each forecaster refines the previous one.");
}
