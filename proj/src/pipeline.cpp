#include "sloppykit/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <Eigen/Core>

#include "sloppykit/csv.hpp"
#include "sloppykit/likelihood.hpp"
#include "sloppykit/sensitivity.hpp"
#include "sloppykit/synth.hpp"

namespace fs = std::filesystem;

namespace sloppykit {

namespace {

constexpr const char* kLibraryVersion = "0.1.0";

[[noreturn]] void bad_config(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

const nlohmann::json& member(const nlohmann::json& j, const char* key,
                             const std::string& path) {
  if (!j.is_object()) bad_config(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) bad_config(path + "." + key, "missing");
  return *it;
}

template <typename T>
T as(const nlohmann::json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_config(path, "wrong type");
  }
}

template <typename T>
T member_or(const nlohmann::json& j, const char* key, const std::string& path,
            T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as<T>(j.at(key), path + "." + key);
}

NoiseSpec noise_from_json(const nlohmann::json& j, const std::string& path) {
  const auto kind = as<std::string>(member(j, "kind", path), path + ".kind");
  if (kind == "heteroscedastic")
    return Heteroscedastic{
        as<double>(member(j, "epsilon", path), path + ".epsilon")};
  if (kind == "homoscedastic")
    return Homoscedastic{as<double>(member(j, "sigma", path), path + ".sigma")};
  bad_config(path + ".kind", "expected heteroscedastic or homoscedastic");
}

nlohmann::json noise_to_json(const NoiseSpec& noise) {
  if (const auto* het = std::get_if<Heteroscedastic>(&noise))
    return {{"kind", "heteroscedastic"}, {"epsilon", het->epsilon}};
  return {{"kind", "homoscedastic"},
          {"sigma", std::get<Homoscedastic>(noise).sigma}};
}

std::string noise_parameter_name(const PipelineConfig& config) {
  if (const auto* synth = std::get_if<SynthSpec>(&config.data))
    return std::holds_alternative<Heteroscedastic>(synth->noise) ? "epsilon"
                                                                 : "sigma";
  return "noise";  // CSV source: the kind is known only once the file is read
}

PriorSpec prior_from_json(const nlohmann::json& j, const ParameterSpec& spec,
                          const std::string& path) {
  if (!j.is_array()) bad_config(path, "expected an array of components");
  const std::size_t dim = spec.dim() + 1;
  auto resolve = [&](const std::string& name,
                     const std::string& at) -> std::size_t {
    if (name == "epsilon" || name == "sigma" || name == "noise")
      return dim - 1;
    try {
      return spec.index_of(name);
    } catch (const DomainError&) {
      bad_config(at, "unknown parameter '" + name + "'");
    }
  };
  std::vector<PriorComponent> components;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    const auto& cj = j.at(i);
    const auto kind = as<std::string>(member(cj, "kind", at), at + ".kind");
    if (kind == "uniform") {
      UniformComponent u;
      u.index = resolve(as<std::string>(member(cj, "name", at), at + ".name"),
                        at + ".name");
      u.lo = as<double>(member(cj, "lo", at), at + ".lo");
      u.hi = as<double>(member(cj, "hi", at), at + ".hi");
      components.push_back(u);
    } else if (kind == "log_normal") {
      LogNormalComponent ln;
      const auto names = as<std::vector<std::string>>(
          member(cj, "names", at), at + ".names");
      for (const auto& name : names)
        ln.indices.push_back(resolve(name, at + ".names"));
      const auto mu = as<std::vector<double>>(member(cj, "mu_log", at),
                                              at + ".mu_log");
      const auto cov = as<std::vector<std::vector<double>>>(
          member(cj, "cov_log", at), at + ".cov_log");
      const auto n = names.size();
      if (mu.size() != n || cov.size() != n)
        bad_config(at, "mu_log/cov_log size must match names");
      ln.mu_log = Eigen::Map<const Eigen::VectorXd>(
          mu.data(), static_cast<Eigen::Index>(n));
      ln.cov_log.resize(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(n));
      for (std::size_t r = 0; r < n; ++r) {
        if (cov[r].size() != n)
          bad_config(at + ".cov_log", "matrix must be square");
        for (std::size_t c = 0; c < n; ++c)
          ln.cov_log(static_cast<Eigen::Index>(r),
                     static_cast<Eigen::Index>(c)) = cov[r][c];
      }
      components.push_back(std::move(ln));
    } else {
      bad_config(at + ".kind", "expected uniform or log_normal");
    }
  }
  try {
    return PriorSpec(dim, std::move(components));
  } catch (const Error& e) {
    bad_config(path, e.what());
  }
}

nlohmann::json prior_to_json(const PriorSpec& prior,
                             const std::vector<std::string>& names) {
  auto arr = nlohmann::json::array();
  for (const auto& component : prior.components()) {
    if (const auto* u = std::get_if<UniformComponent>(&component)) {
      arr.push_back({{"kind", "uniform"},
                     {"name", names.at(u->index)},
                     {"lo", u->lo},
                     {"hi", u->hi}});
    } else {
      const auto& ln = std::get<LogNormalComponent>(component);
      auto block_names = nlohmann::json::array();
      for (auto idx : ln.indices) block_names.push_back(names.at(idx));
      std::vector<double> mu(ln.mu_log.data(),
                             ln.mu_log.data() + ln.mu_log.size());
      auto cov = nlohmann::json::array();
      for (Eigen::Index r = 0; r < ln.cov_log.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < ln.cov_log.cols(); ++c)
          row.push_back(ln.cov_log(r, c));
        cov.push_back(std::move(row));
      }
      arr.push_back({{"kind", "log_normal"},
                     {"names", std::move(block_names)},
                     {"mu_log", std::move(mu)},
                     {"cov_log", std::move(cov)}});
    }
  }
  return arr;
}

MatrixKind matrix_kind_from_string(const std::string& s,
                                   const std::string& path) {
  if (s == "H") return MatrixKind::H;
  if (s == "L") return MatrixKind::L;
  if (s == "P") return MatrixKind::P;
  if (s == "G") return MatrixKind::G;
  bad_config(path, "expected one of H, L, P, G");
}

void validate_config(const PipelineConfig& config) {
  const auto model = make_model(config.model_name);
  const std::size_t dim = model->spec().dim();
  if (!config.prior) bad_config("prior", "missing");
  if (config.prior->dim() != dim + 1)
    bad_config("prior", "must cover the " + std::to_string(dim) +
                            " model parameters plus the noise parameter");
  if (!(config.delta >= 1e-4 && config.delta <= 1e-2))
    bad_config("delta", "must lie in [1e-4, 1e-2]");
  if (config.g_subsample < 1) bad_config("g_subsample", "must be >= 1");
  if (config.out_dir.empty()) bad_config("out", "must be non-empty");
  if (config.matrices.empty()) bad_config("matrices", "must be non-empty");
  for (std::size_t i = 0; i < config.matrices.size(); ++i)
    for (std::size_t k = i + 1; k < config.matrices.size(); ++k)
      if (config.matrices[i] == config.matrices[k])
        bad_config("matrices", "duplicate entry");
  for (auto kind : config.matrices) {
    if ((kind == MatrixKind::P || kind == MatrixKind::G) &&
        !config.smc_enabled)
      bad_config("matrices",
                 matrix_kind_name(kind) + " needs the posterior ensemble; "
                                          "enable smc");
    if ((kind == MatrixKind::H || kind == MatrixKind::L) &&
        !config.mle_enabled)
      bad_config("matrices", matrix_kind_name(kind) +
                                 " needs the maximum-likelihood fit; "
                                 "enable mle");
  }
  if (const auto* synth = std::get_if<SynthSpec>(&config.data)) {
    if (synth->grid.empty()) bad_config("data.grid", "must be non-empty");
    if (synth->theta &&
        synth->theta->size() != static_cast<Eigen::Index>(dim))
      bad_config("data.theta", "must have " + std::to_string(dim) +
                                   " entries");
  } else if (std::get<std::string>(config.data).empty()) {
    bad_config("data.path", "must be non-empty");
  }
}

template <typename F>
void stage(const char* name, F&& body) {
  try {
    body();
  } catch (const ConfigError&) {
    throw;  // configuration problems keep their own exit code
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Stale artifacts from a previous run with different settings would escape
// the manifest, so known artifact names are cleared up front.
void clear_known_artifacts(const std::string& out_dir) {
  static const char* kNames[] = {
      "dataset.csv",      "ensemble.csv",   "ensemble_stages.json",
      "theta_star.json",  "manifest.json",  "report_H.json",
      "report_L.json",    "report_P.json",  "report_G.json",
      "spectrum_H.csv",   "spectrum_L.csv", "spectrum_P.csv",
      "spectrum_G.csv"};
  for (const char* name : kNames) {
    std::error_code ec;
    fs::remove(fs::path(out_dir) / name, ec);
  }
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "' for hashing");
  std::uint64_t hash = 14695981039346656037ULL;
  char buffer[65536];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    const auto got = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return hash;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig config;
  config.model_name =
      as<std::string>(member(j, "model", "config"), "model");
  const auto model = make_model(config.model_name);  // validates the name

  const auto& dj = member(j, "data", "config");
  const auto source =
      as<std::string>(member(dj, "source", "data"), "data.source");
  if (source == "synth") {
    SynthSpec synth;
    synth.noise = noise_from_json(member(dj, "noise", "data"), "data.noise");
    synth.seed = member_or<std::uint64_t>(dj, "seed", "data", 0);
    const auto& gj = member(dj, "grid", "data");
    if (!gj.is_array()) bad_config("data.grid", "expected an array");
    for (std::size_t i = 0; i < gj.size(); ++i) {
      const std::string at = "data.grid[" + std::to_string(i) + "]";
      ObsPoint point;
      const auto x = as<std::vector<double>>(member(gj.at(i), "x", at),
                                             at + ".x");
      point.x = Eigen::Map<const Eigen::VectorXd>(
          x.data(), static_cast<Eigen::Index>(x.size()));
      point.channel = member_or<int>(gj.at(i), "channel", at, 0);
      synth.grid.push_back(std::move(point));
    }
    if (dj.contains("theta")) {
      const auto theta =
          as<std::vector<double>>(dj.at("theta"), "data.theta");
      synth.theta = Eigen::Map<const Eigen::VectorXd>(
          theta.data(), static_cast<Eigen::Index>(theta.size()));
    }
    config.data = std::move(synth);
  } else if (source == "csv") {
    config.data = as<std::string>(member(dj, "path", "data"), "data.path");
  } else {
    bad_config("data.source", "expected synth or csv");
  }

  config.prior =
      prior_from_json(member(j, "prior", "config"), model->spec(), "prior");

  if (j.contains("smc")) {
    const auto& sj = j.at("smc");
    config.smc_enabled = member_or<bool>(sj, "enabled", "smc", true);
    config.smc.particles = member_or<int>(sj, "particles", "smc", 10000);
    config.smc.ess_threshold =
        member_or<double>(sj, "ess_threshold", "smc", 0.5);
    config.smc.move_completion =
        member_or<double>(sj, "move_completion", "smc", 0.95);
    config.smc.proposal_scale =
        member_or<double>(sj, "proposal_scale", "smc", 0.5);
    config.smc.max_cycles = member_or<int>(sj, "max_cycles", "smc", 50);
    config.smc.max_stages = member_or<int>(sj, "max_stages", "smc", 1000);
    config.smc.seed = member_or<std::uint64_t>(sj, "seed", "smc", 0);
  }
  if (j.contains("mle"))
    config.mle_enabled = member_or<bool>(j.at("mle"), "enabled", "mle", true);
  config.delta = member_or<double>(j, "delta", "config", 1e-3);
  if (j.contains("matrices")) {
    config.matrices.clear();
    const auto kinds =
        as<std::vector<std::string>>(j.at("matrices"), "matrices");
    for (std::size_t i = 0; i < kinds.size(); ++i)
      config.matrices.push_back(matrix_kind_from_string(
          kinds[i], "matrices[" + std::to_string(i) + "]"));
  } else {
    config.matrices = {MatrixKind::H, MatrixKind::L, MatrixKind::P,
                       MatrixKind::G};
  }
  config.g_subsample = member_or<int>(j, "g_subsample", "config", 500);
  config.out_dir = member_or<std::string>(j, "out", "config", "run");

  validate_config(config);
  return config;
}

nlohmann::json config_to_json(const PipelineConfig& config) {
  validate_config(config);
  const auto model = make_model(config.model_name);
  nlohmann::json j;
  j["model"] = config.model_name;

  nlohmann::json dj;
  if (const auto* synth = std::get_if<SynthSpec>(&config.data)) {
    dj["source"] = "synth";
    dj["noise"] = noise_to_json(synth->noise);
    dj["seed"] = synth->seed;
    auto grid = nlohmann::json::array();
    for (const auto& point : synth->grid) {
      std::vector<double> x(point.x.data(), point.x.data() + point.x.size());
      grid.push_back({{"x", std::move(x)}, {"channel", point.channel}});
    }
    dj["grid"] = std::move(grid);
    if (synth->theta)
      dj["theta"] = std::vector<double>(
          synth->theta->data(), synth->theta->data() + synth->theta->size());
  } else {
    dj["source"] = "csv";
    dj["path"] = std::get<std::string>(config.data);
  }
  j["data"] = std::move(dj);

  auto names = model->spec().estimated_names();
  names.push_back(noise_parameter_name(config));
  j["prior"] = prior_to_json(*config.prior, names);

  j["smc"] = {{"enabled", config.smc_enabled},
              {"particles", config.smc.particles},
              {"ess_threshold", config.smc.ess_threshold},
              {"move_completion", config.smc.move_completion},
              {"proposal_scale", config.smc.proposal_scale},
              {"max_cycles", config.smc.max_cycles},
              {"max_stages", config.smc.max_stages},
              {"seed", config.smc.seed}};
  j["mle"] = {{"enabled", config.mle_enabled}};
  j["delta"] = config.delta;
  auto kinds = nlohmann::json::array();
  for (auto kind : config.matrices) kinds.push_back(matrix_kind_name(kind));
  j["matrices"] = std::move(kinds);
  j["g_subsample"] = config.g_subsample;
  j["out"] = config.out_dir;
  return j;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

PipelineResult run_pipeline(const PipelineConfig& config,
                            PipelineStage until) {
  validate_config(config);
  const auto model = make_model(config.model_name);
  const PriorSpec& prior = *config.prior;

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec && !fs::is_directory(config.out_dir))
    throw ConfigError("cannot create output directory '" + config.out_dir +
                      "'");
  clear_known_artifacts(config.out_dir);

  PipelineResult result;
  result.out_dir = config.out_dir;
  auto out_path = [&](const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
  };
  auto add_artifact = [&](const std::string& name) {
    result.artifacts.push_back(name);
  };
  auto write_manifest = [&]() {
    nlohmann::json m;
    m["config"] = config_to_json(config);
    m["versions"] = {
        {"sloppykit", kLibraryVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)}};
    auto arr = nlohmann::json::array();
    auto sorted = result.artifacts;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& name : sorted) {
      char hex[17];
      std::snprintf(hex, sizeof(hex), "%016llx",
                    static_cast<unsigned long long>(
                        fnv1a64_file(out_path(name))));
      arr.push_back({{"path", name}, {"fnv1a64", hex}});
    }
    m["artifacts"] = std::move(arr);
    write_text(out_path("manifest.json"), dump(m));
    add_artifact("manifest.json");
  };

  stage("data", [&] {
    if (const auto* synth = std::get_if<SynthSpec>(&config.data)) {
      const ParameterVector theta =
          synth->theta ? *synth->theta : model->spec().reference();
      if (const auto* het = std::get_if<Heteroscedastic>(&synth->noise))
        result.dataset = synth_heteroscedastic(*model, theta, synth->grid,
                                               het->epsilon, synth->seed);
      else
        result.dataset = synth_homoscedastic(
            *model, theta, synth->grid,
            std::get<Homoscedastic>(synth->noise).sigma, synth->seed);
    } else {
      result.dataset = read_dataset_csv(std::get<std::string>(config.data));
    }
    write_dataset_csv(*result.dataset, out_path("dataset.csv"));
    add_artifact("dataset.csv");
  });
  if (until == PipelineStage::Data) {
    write_manifest();
    return result;
  }

  if (config.smc_enabled) {
    stage("sample", [&] {
      result.smc = smc_sample(*model, *result.dataset, prior, config.smc);
      write_ensemble_csv(result.smc->ensemble, out_path("ensemble.csv"));
      add_artifact("ensemble.csv");
      nlohmann::json sj;
      sj["seed"] = config.smc.seed;
      auto stages_json = nlohmann::json::array();
      for (const auto& st : result.smc->stages)
        stages_json.push_back({{"gamma", st.gamma},
                               {"ess", st.ess},
                               {"acceptance", st.acceptance},
                               {"cycles", st.cycles},
                               {"failed_evaluations", st.failed_evaluations}});
      sj["stages"] = std::move(stages_json);
      write_text(out_path("ensemble_stages.json"), dump(sj));
      add_artifact("ensemble_stages.json");
    });
  }
  if (until == PipelineStage::Sample) {
    write_manifest();
    return result;
  }

  if (config.mle_enabled) {
    stage("fit", [&] {
      ParameterVector init;
      if (result.smc)
        init = result.smc->ensemble.log_theta.array()
                   .exp()
                   .matrix()
                   .colwise()
                   .mean()
                   .transpose();
      else
        init = prior.median();
      const auto [lower, upper] = prior.support_bounds();
      result.mle = mle_fit(*model, *result.dataset, init, lower, upper);

      auto names = model->spec().estimated_names();
      names.push_back(result.dataset->heteroscedastic() ? "epsilon" : "sigma");
      nlohmann::json tj;
      tj["names"] = names;
      tj["theta"] = std::vector<double>(
          result.mle->theta.data(),
          result.mle->theta.data() + result.mle->theta.size());
      tj["cost"] = result.mle->cost;
      tj["evaluations"] = result.mle->evaluations;
      tj["converged"] = result.mle->converged;
      write_text(out_path("theta_star.json"), dump(tj));
      add_artifact("theta_star.json");
    });
  }
  if (until == PipelineStage::Fit) {
    write_manifest();
    return result;
  }

  stage("analyze", [&] {
    for (auto kind : config.matrices) {
      SensitivityMatrix matrix = [&] {
        switch (kind) {
          case MatrixKind::H:
            return hessian_H(*model, *result.dataset, result.mle->theta,
                             config.delta);
          case MatrixKind::L:
            return lm_hessian_L(*model, *result.dataset, result.mle->theta,
                                config.delta);
          case MatrixKind::P:
            return pca_matrix_P(result.smc->ensemble);
          case MatrixKind::G:
            return lis_matrix_G(result.smc->ensemble, prior, *model,
                                *result.dataset, config.delta,
                                config.g_subsample, config.smc.seed);
        }
        throw DomainError("run_pipeline: unknown matrix kind");
      }();
      matrix.context = (kind == MatrixKind::H || kind == MatrixKind::L)
                           ? "theta_star"
                           : "posterior-ensemble";
      const auto report = build_report(matrix);
      const auto letter = matrix_kind_name(kind);
      write_text(out_path("report_" + letter + ".json"),
                 dump(report_to_json(report)));
      add_artifact("report_" + letter + ".json");
      write_text(out_path("spectrum_" + letter + ".csv"),
                 emit_spectrum_table(report));
      add_artifact("spectrum_" + letter + ".csv");
      result.reports.emplace(letter, report);
    }
  });
  write_manifest();
  return result;
}

}  // namespace sloppykit
