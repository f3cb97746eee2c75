#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sloppykit/csv.hpp"
#include "sloppykit/eigenparameters.hpp"
#include "sloppykit/errors.hpp"
#include "sloppykit/model.hpp"
#include "sloppykit/optimize.hpp"
#include "sloppykit/pipeline.hpp"
#include "sloppykit/prior.hpp"
#include "sloppykit/sensitivity.hpp"
#include "sloppykit/smc.hpp"
#include "sloppykit/synth.hpp"

namespace py = pybind11;
using namespace sloppykit;

namespace {

ObservationGrid to_grid(const Eigen::MatrixXd& x,
                        const std::optional<Eigen::VectorXi>& channels) {
  if (channels && channels->size() != x.rows())
    throw DomainError("channels must have one entry per grid row");
  ObservationGrid grid;
  grid.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    ObsPoint point;
    point.x = x.row(i).transpose();
    point.channel = channels ? (*channels)[i] : 0;
    grid.push_back(std::move(point));
  }
  return grid;
}

NoiseSpec to_noise(const std::pair<std::string, double>& noise) {
  if (noise.first == "heteroscedastic") return Heteroscedastic{noise.second};
  if (noise.first == "homoscedastic") return Homoscedastic{noise.second};
  throw DomainError("noise kind must be heteroscedastic or homoscedastic");
}

std::pair<std::string, double> from_noise(const NoiseSpec& noise) {
  if (const auto* het = std::get_if<Heteroscedastic>(&noise))
    return {"heteroscedastic", het->epsilon};
  return {"homoscedastic", std::get<Homoscedastic>(noise).sigma};
}

Dataset dataset_from_arrays(const Eigen::MatrixXd& x,
                            const Eigen::VectorXi& channel,
                            const Eigen::VectorXd& y,
                            const std::pair<std::string, double>& noise) {
  if (channel.size() != x.rows() || y.size() != x.rows())
    throw DomainError("x, channel, and y must have matching lengths");
  std::vector<DataRecord> records;
  records.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    records.push_back({x.row(i).transpose(), channel[i], y[i]});
  return Dataset(std::move(records), to_noise(noise));
}

Eigen::MatrixXd dataset_x(const Dataset& dataset) {
  const auto& records = dataset.records();
  const auto dim = records.front().x.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(records.size()), dim);
  for (std::size_t i = 0; i < records.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = records[i].x.transpose();
  return x;
}

Eigen::VectorXi dataset_channels(const Dataset& dataset) {
  const auto& records = dataset.records();
  Eigen::VectorXi ch(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i)
    ch[static_cast<Eigen::Index>(i)] = records[i].channel;
  return ch;
}

Eigen::VectorXd dataset_y(const Dataset& dataset) {
  const auto& records = dataset.records();
  Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = records[i].y_obs;
  return y;
}

nlohmann::json parse_json_text(const std::string& text,
                               const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

PipelineStage stage_from_string(const std::string& until) {
  if (until == "data") return PipelineStage::Data;
  if (until == "sample") return PipelineStage::Sample;
  if (until == "fit") return PipelineStage::Fit;
  if (until == "analyze") return PipelineStage::Analyze;
  throw DomainError("until must be one of data, sample, fit, analyze");
}

py::dict summarize_run(const PipelineResult& result) {
  py::dict out;
  out["out_dir"] = result.out_dir;
  out["artifacts"] = result.artifacts;
  if (result.mle) {
    py::dict fit;
    fit["theta"] = result.mle->theta;
    fit["cost"] = result.mle->cost;
    fit["evaluations"] = result.mle->evaluations;
    fit["converged"] = result.mle->converged;
    out["mle"] = fit;
  }
  py::dict reports;
  for (const auto& [kind, report] : result.reports) {
    py::dict r;
    r["stiffest"] = report.eigenparameters.front().display;
    r["eigenvalues"] = report.eigenvalues;
    r["rescaled_eigenvalues"] = report.rescaled_eigenvalues;
    reports[py::str(kind)] = r;
  }
  out["reports"] = reports;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Sloppiness analysis of mechanistic models: synthetic data, SMC "
      "posterior sampling, maximum-likelihood fits, and sensitivity spectra";
  m.attr("__version__") = "0.1.0";

  // Exception hierarchy; derived classes registered after their bases so
  // the most specific translator wins.
  auto base = py::register_exception<Error>(m, "SloppykitError");
  py::register_exception<DomainError>(m, "DomainError", base);
  auto config = py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<NumericError>(m, "NumericError", base);
  py::register_exception<StageError>(m, "StageError", base);
  py::register_exception<ParseError>(m, "ParseError", config);

  py::class_<Model>(m, "Model")
      .def_property_readonly("name", &Model::name)
      .def_property_readonly(
          "parameter_names",
          [](const Model& self) { return self.spec().estimated_names(); })
      .def_property_readonly(
          "reference",
          [](const Model& self) { return self.spec().reference(); })
      .def_property_readonly("channel_names", &Model::channel_names)
      .def(
          "predict",
          [](const Model& self, const ParameterVector& theta,
             const Eigen::MatrixXd& x,
             const std::optional<Eigen::VectorXi>& channels) {
            const auto values = self.predict(to_grid(x, channels), theta);
            return Eigen::Map<const Eigen::VectorXd>(
                values.data(), static_cast<Eigen::Index>(values.size()))
                .eval();
          },
          py::arg("theta"), py::arg("x"), py::arg("channels") = std::nullopt,
          "Noiseless observables on the grid, one value per row of x.")
      .def("__repr__", [](const Model& self) {
        return "<sloppykit.Model '" + self.name() + "'>";
      });

  m.def("make_model", &make_model, py::arg("name"),
        "Construct a model by name: michaelis_menten, ecosystem, or "
        "beeler_reuter.");

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from_arrays), py::arg("x"), py::arg("channel"),
           py::arg("y"), py::arg("noise"))
      .def_property_readonly("x", &dataset_x)
      .def_property_readonly("channel", &dataset_channels)
      .def_property_readonly("y", &dataset_y)
      .def_property_readonly("noise",
                             [](const Dataset& self) {
                               return from_noise(self.noise());
                             })
      .def_property_readonly(
          "provenance",
          [](const Dataset& self) -> py::object {
            if (!self.provenance()) return py::none();
            py::dict p;
            p["seed"] = self.provenance()->seed;
            p["theta"] = self.provenance()->generating_theta;
            return p;
          })
      .def("__len__", &Dataset::size)
      .def("to_csv",
           [](const Dataset& self, const std::string& path) {
             write_dataset_csv(self, path);
           },
           py::arg("path"))
      .def_static("from_csv", &read_dataset_csv, py::arg("path"))
      .def("__repr__", [](const Dataset& self) {
        const auto [kind, value] = from_noise(self.noise());
        std::ostringstream out;
        out << "<sloppykit.Dataset " << self.size() << " records, " << kind
            << " " << value << ">";
        return out.str();
      });

  m.def(
      "synth",
      [](const Model& model, const ParameterVector& theta,
         const Eigen::MatrixXd& x,
         const std::optional<Eigen::VectorXi>& channels,
         const std::pair<std::string, double>& noise, std::uint64_t seed) {
        const auto grid = to_grid(x, channels);
        if (noise.first == "heteroscedastic")
          return synth_heteroscedastic(model, theta, grid, noise.second,
                                       seed);
        if (noise.first == "homoscedastic")
          return synth_homoscedastic(model, theta, grid, noise.second, seed);
        throw DomainError(
            "noise kind must be heteroscedastic or homoscedastic");
      },
      py::arg("model"), py::arg("theta"), py::arg("x"),
      py::arg("channels") = std::nullopt,
      py::arg("noise") = std::pair<std::string, double>{"heteroscedastic",
                                                        0.25},
      py::arg("seed") = 0,
      "Synthetic dataset: model predictions on the grid plus seeded noise.");

  py::class_<UniformComponent>(m, "UniformComponent")
      .def(py::init([](std::size_t index, double lo, double hi) {
             return UniformComponent{index, lo, hi};
           }),
           py::arg("index"), py::arg("lo"), py::arg("hi"))
      .def_readonly("index", &UniformComponent::index)
      .def_readonly("lo", &UniformComponent::lo)
      .def_readonly("hi", &UniformComponent::hi);

  py::class_<LogNormalComponent>(m, "LogNormalComponent")
      .def(py::init([](std::vector<std::size_t> indices, Eigen::VectorXd mu,
                       Eigen::MatrixXd cov) {
             return LogNormalComponent{std::move(indices), std::move(mu),
                                       std::move(cov)};
           }),
           py::arg("indices"), py::arg("mu_log"), py::arg("cov_log"))
      .def_readonly("indices", &LogNormalComponent::indices)
      .def_readonly("mu_log", &LogNormalComponent::mu_log)
      .def_readonly("cov_log", &LogNormalComponent::cov_log);

  py::class_<PriorSpec>(m, "PriorSpec")
      .def(py::init<std::size_t, std::vector<PriorComponent>>(),
           py::arg("dim"), py::arg("components"))
      .def_property_readonly("dim", &PriorSpec::dim)
      .def("log_density", &PriorSpec::log_density, py::arg("theta"))
      .def("median", &PriorSpec::median)
      .def("log_space_covariance", &PriorSpec::log_space_covariance)
      .def("support_bounds", &PriorSpec::support_bounds);

  m.def("prior_sample", &prior_sample, py::arg("prior"), py::arg("count"),
        py::arg("seed"), "Matrix of prior draws, one row per particle.");

  py::class_<ParticleEnsemble>(m, "ParticleEnsemble")
      .def_readonly("names", &ParticleEnsemble::names)
      .def_readonly("log_theta", &ParticleEnsemble::log_theta)
      .def_readonly("log_likelihoods", &ParticleEnsemble::log_likelihoods)
      .def_readonly("temperature", &ParticleEnsemble::temperature)
      .def("thetas", &ParticleEnsemble::thetas,
           "Particles in natural space, one row each.");

  py::class_<SmcStage>(m, "SmcStage")
      .def_readonly("gamma", &SmcStage::gamma)
      .def_readonly("ess", &SmcStage::ess)
      .def_readonly("acceptance", &SmcStage::acceptance)
      .def_readonly("cycles", &SmcStage::cycles)
      .def_readonly("failed_evaluations", &SmcStage::failed_evaluations);

  py::class_<SmcResult>(m, "SmcResult")
      .def_readonly("ensemble", &SmcResult::ensemble)
      .def_readonly("stages", &SmcResult::stages);

  m.def(
      "smc_sample",
      [](const Model& model, const Dataset& data, const PriorSpec& prior,
         int particles, std::uint64_t seed, double ess_threshold,
         double move_completion, double proposal_scale, int max_cycles,
         int max_stages) {
        SmcConfig config;
        config.particles = particles;
        config.seed = seed;
        config.ess_threshold = ess_threshold;
        config.move_completion = move_completion;
        config.proposal_scale = proposal_scale;
        config.max_cycles = max_cycles;
        config.max_stages = max_stages;
        return smc_sample(model, data, prior, config);
      },
      py::arg("model"), py::arg("data"), py::arg("prior"),
      py::arg("particles") = 2000, py::arg("seed") = 0,
      py::arg("ess_threshold") = 0.5, py::arg("move_completion") = 0.95,
      py::arg("proposal_scale") = 0.5, py::arg("max_cycles") = 50,
      py::arg("max_stages") = 1000,
      "Annealed SMC posterior sample; deterministic for a fixed seed.");

  py::class_<MleResult>(m, "MleResult")
      .def_readonly("theta", &MleResult::theta)
      .def_readonly("cost", &MleResult::cost)
      .def_readonly("evaluations", &MleResult::evaluations)
      .def_readonly("converged", &MleResult::converged);

  m.def(
      "mle_fit",
      [](const Model& model, const Dataset& data,
         const ParameterVector& init, const ParameterVector& lower,
         const ParameterVector& upper) {
        return mle_fit(model, data, init, lower, upper);
      },
      py::arg("model"), py::arg("data"), py::arg("init"), py::arg("lower"),
      py::arg("upper"),
      "Maximum-likelihood fit of model parameters plus the noise "
      "parameter.");

  py::class_<SensitivityMatrix>(m, "SensitivityMatrix")
      .def_property_readonly(
          "kind",
          [](const SensitivityMatrix& self) {
            return matrix_kind_name(self.kind);
          })
      .def_readonly("values", &SensitivityMatrix::values)
      .def_readonly("names", &SensitivityMatrix::names)
      .def_readonly("context", &SensitivityMatrix::context);

  m.def("hessian_H", &hessian_H, py::arg("model"), py::arg("data"),
        py::arg("theta_star"), py::arg("delta") = 1e-3,
        "Central finite-difference Hessian of the cost in log parameters.");
  m.def("lm_hessian_L", &lm_hessian_L, py::arg("model"), py::arg("data"),
        py::arg("theta_star"), py::arg("delta") = 1e-3,
        "Gauss-Newton J^T J of the weighted residuals in log parameters.");
  m.def("pca_matrix_P",
        [](const ParticleEnsemble& ensemble) {
          return pca_matrix_P(ensemble);
        },
        py::arg("ensemble"),
        "Inverse posterior log-covariance of the model parameters.");
  m.def("lis_matrix_G", &lis_matrix_G, py::arg("ensemble"), py::arg("prior"),
        py::arg("model"), py::arg("data"), py::arg("delta") = 1e-3,
        py::arg("subsample") = 500, py::arg("seed") = 0x4c4953ULL,
        "Posterior-averaged prior-preconditioned Hessian.");
  m.def(
      "sample_log_covariance",
      [](const Eigen::MatrixXd& log_theta) {
        return sample_log_covariance(log_theta);
      },
      py::arg("log_theta"), "Unbiased sample covariance of log particles.");
  m.def(
      "eigendecompose",
      [](const Eigen::MatrixXd& matrix) { return eigendecompose(matrix); },
      py::arg("matrix"),
      "Eigenvalues (descending) and sign-fixed eigenvector columns.");

  py::class_<EigenparameterTerm>(m, "EigenparameterTerm")
      .def_readonly("name", &EigenparameterTerm::name)
      .def_readonly("exponent", &EigenparameterTerm::exponent)
      .def("__repr__", [](const EigenparameterTerm& self) {
        std::ostringstream out;
        out << "<sloppykit.EigenparameterTerm " << self.name << "^"
            << self.exponent << ">";
        return out.str();
      });

  py::class_<Eigenparameter>(m, "Eigenparameter")
      .def_readonly("rank", &Eigenparameter::rank)
      .def_readonly("lambda_", &Eigenparameter::lambda)
      .def_readonly("lambda_rel", &Eigenparameter::lambda_rel)
      .def_readonly("terms", &Eigenparameter::terms)
      .def_readonly("display", &Eigenparameter::display)
      .def("__repr__", [](const Eigenparameter& self) {
        return "<sloppykit.Eigenparameter #" + std::to_string(self.rank) +
               " " + self.display + ">";
      });

  py::class_<SensitivityReport>(m, "SensitivityReport")
      .def_property_readonly(
          "kind",
          [](const SensitivityReport& self) {
            return matrix_kind_name(self.kind);
          })
      .def_readonly("context", &SensitivityReport::context)
      .def_readonly("eigenvalues", &SensitivityReport::eigenvalues)
      .def_readonly("rescaled_eigenvalues",
                    &SensitivityReport::rescaled_eigenvalues)
      .def_readonly("eigenvectors", &SensitivityReport::eigenvectors)
      .def_readonly("eigenparameters", &SensitivityReport::eigenparameters)
      .def("to_json",
           [](const SensitivityReport& self) {
             return report_to_json(self).dump(2);
           })
      .def_static("from_json", [](const std::string& text) {
        return report_from_json(parse_json_text(text, "report"));
      });

  m.def("build_report", &build_report, py::arg("matrix"),
        py::arg("threshold") = 0.2,
        "Eigendecomposition plus eigenparameter extraction for a matrix.");
  m.def("extract_eigenparameters", &extract_eigenparameters,
        py::arg("eigenvectors"), py::arg("eigenvalues"), py::arg("names"),
        py::arg("threshold") = 0.2);
  m.def("format_eigenparameter", &format_eigenparameter, py::arg("terms"));
  m.def("parse_eigenparameter", &parse_eigenparameter, py::arg("text"));
  m.def("spectrum_table", &emit_spectrum_table, py::arg("report"),
        "CSV text of (rank, lambda, lambda_rel) rows.");

  m.def(
      "run_pipeline",
      [](const std::string& config_json, const std::string& until) {
        const auto config =
            config_from_json(parse_json_text(config_json, "config"));
        return summarize_run(run_pipeline(config, stage_from_string(until)));
      },
      py::arg("config_json"), py::arg("until") = "analyze",
      "Run the analysis pipeline from a JSON configuration string; returns "
      "a summary dict, with artifacts written to the configured directory.");
  m.def(
      "run_preset",
      [](const std::string& name, const std::string& until,
         const std::optional<std::string>& out_dir) {
        PipelineConfig config = preset_config(name);
        if (out_dir) config.out_dir = *out_dir;
        return summarize_run(run_pipeline(config, stage_from_string(until)));
      },
      py::arg("name"), py::arg("until") = "analyze",
      py::arg("out_dir") = std::nullopt,
      "Run a built-in scenario preset end to end.");
  m.def("preset_names", &preset_names);
  m.def(
      "preset_config",
      [](const std::string& name) {
        return config_to_json(preset_config(name)).dump(2);
      },
      py::arg("name"), "JSON text of a built-in preset configuration.");
}
