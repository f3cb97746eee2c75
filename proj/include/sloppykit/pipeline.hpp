#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sloppykit/dataset.hpp"
#include "sloppykit/eigenparameters.hpp"
#include "sloppykit/optimize.hpp"
#include "sloppykit/prior.hpp"
#include "sloppykit/smc.hpp"

namespace sloppykit {

// Synthetic-data request: evaluate the model at `theta` (reference values
// when absent) on `grid` and add noise per `noise` under `seed`.
struct SynthSpec {
  ObservationGrid grid;
  NoiseSpec noise{Heteroscedastic{0.25}};
  std::optional<ParameterVector> theta;
  std::uint64_t seed = 0;
};

// One full run of the analysis procedure: data, posterior sampling,
// maximum-likelihood fit, sensitivity matrices.
struct PipelineConfig {
  std::string model_name;
  std::variant<SynthSpec, std::string> data;  // synth spec or dataset CSV path
  std::optional<PriorSpec> prior;             // always required; optional only
                                              // to keep the struct movable
  bool smc_enabled = true;
  SmcConfig smc;
  bool mle_enabled = true;
  double delta = 1e-3;
  std::vector<MatrixKind> matrices;
  int g_subsample = 500;
  std::string out_dir = "run";
};

// How far the pipeline executes; every subcommand is a prefix of the full
// run and each prefix is deterministic for a fixed config.
enum class PipelineStage { Data, Sample, Fit, Analyze };

struct PipelineResult {
  std::string out_dir;
  std::optional<Dataset> dataset;
  std::optional<SmcResult> smc;
  std::optional<MleResult> mle;
  std::map<std::string, SensitivityReport> reports;  // keyed by kind letter
  std::vector<std::string> artifacts;                // paths relative to out_dir
};

// Runs stages up to `until` and writes a manifest covering every artifact
// produced. Stage failures raise StageError; artifacts from completed
// stages are kept.
PipelineResult run_pipeline(const PipelineConfig& config,
                            PipelineStage until = PipelineStage::Analyze);

// JSON round trip. Parsing validates the schema and reports the offending
// path; serialization is canonical (parse(serialize(c)) reproduces c).
nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);

// FNV-1a 64-bit content hash used by the run manifest.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);

// Built-in scenario presets.
std::vector<std::string> preset_names();
PipelineConfig preset_config(const std::string& name);

}  // namespace sloppykit
