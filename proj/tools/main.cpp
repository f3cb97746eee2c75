#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sloppykit/csv.hpp"
#include "sloppykit/pipeline.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path,
                  "pipeline configuration JSON file");
  cmd->add_option("--preset", opts.preset, [] {
    std::string help = "built-in scenario preset (";
    for (const auto& name : sloppykit::preset_names()) {
      if (help.back() != '(') help += ", ";
      help += name;
    }
    return help + ")";
  }());
  cmd->add_option("--seed", opts.seed,
                  "override the synthetic-data and sampler seeds");
  cmd->add_option("--out", opts.out_dir, "override the output directory");
}

sloppykit::PipelineConfig build_config(const CommonOptions& opts) {
  if (opts.config_path.empty() == opts.preset.empty())
    throw sloppykit::ConfigError(
        "exactly one of --config or --preset is required");
  auto config = opts.config_path.empty()
                    ? sloppykit::preset_config(opts.preset)
                    : sloppykit::load_config(opts.config_path);
  if (opts.seed) {
    if (auto* synth = std::get_if<sloppykit::SynthSpec>(&config.data))
      synth->seed = *opts.seed;
    config.smc.seed = *opts.seed;
  }
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  return config;
}

void print_summary(const sloppykit::PipelineResult& result) {
  if (result.dataset)
    std::cout << "dataset: " << result.dataset->size() << " records\n";
  if (result.smc) {
    const auto& stages = result.smc->stages;
    std::cout << "ensemble: " << result.smc->ensemble.log_theta.rows()
              << " particles, " << (stages.size() - 1)
              << " temperature stages\n";
  }
  if (result.mle)
    std::cout << "theta_star: cost "
              << sloppykit::format_double(result.mle->cost) << " after "
              << result.mle->evaluations << " evaluations\n";
  for (const auto& [kind, report] : result.reports)
    std::cout << "stiffest " << kind << ": "
              << report.eigenparameters.front().display << " (lambda "
              << sloppykit::format_double(report.eigenvalues(0)) << ")\n";
  std::cout << "artifacts: " << result.out_dir << "\n";
}

int run_stage(const CommonOptions& opts, sloppykit::PipelineStage until) {
  const auto config = build_config(opts);
  const auto result = sloppykit::run_pipeline(config, until);
  print_summary(result);
  return 0;
}

int run_report(const std::string& report_path, const std::string& out_path) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in)
    throw sloppykit::ConfigError("cannot open report '" + report_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw sloppykit::ParseError("report '" + report_path + "': " + e.what());
  }
  const auto report = sloppykit::report_from_json(j);
  const auto table = sloppykit::emit_spectrum_table(report);
  if (out_path.empty()) {
    std::cout << table;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
      throw sloppykit::ConfigError("cannot open '" + out_path +
                                   "' for writing");
    out << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sloppiness analysis of mechanistic models: synthetic data, SMC "
      "posterior sampling, maximum-likelihood fits, and sensitivity "
      "spectra"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto* synth = app.add_subcommand("synth", "generate the synthetic dataset");
  auto* sample =
      app.add_subcommand("sample", "dataset plus the SMC posterior ensemble");
  auto* fit =
      app.add_subcommand("fit", "dataset, ensemble, and maximum-likelihood fit");
  auto* analyze = app.add_subcommand(
      "analyze", "full analysis: data, sampling, fit, sensitivity reports");
  auto* run = app.add_subcommand("run", "alias of analyze: the full pipeline");
  for (auto* cmd : {synth, sample, fit, analyze, run}) add_common(cmd, opts);

  std::string report_path, report_out;
  auto* report =
      app.add_subcommand("report", "print a report's eigenvalue spectrum CSV");
  report->add_option("report_json", report_path, "SensitivityReport JSON file")
      ->required();
  report->add_option("--out", report_out, "write the CSV here instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return run_stage(opts, sloppykit::PipelineStage::Data);
    if (sample->parsed())
      return run_stage(opts, sloppykit::PipelineStage::Sample);
    if (fit->parsed()) return run_stage(opts, sloppykit::PipelineStage::Fit);
    if (analyze->parsed() || run->parsed())
      return run_stage(opts, sloppykit::PipelineStage::Analyze);
    if (report->parsed()) return run_report(report_path, report_out);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const sloppykit::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const sloppykit::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sloppykit::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sloppykit::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
