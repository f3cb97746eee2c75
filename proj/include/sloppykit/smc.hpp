#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sloppykit/dataset.hpp"
#include "sloppykit/model.hpp"
#include "sloppykit/prior.hpp"

namespace sloppykit {

struct SmcConfig {
  int particles = 10000;
  double ess_threshold = 0.5;     // target ESS as a fraction of particles
  double move_completion = 0.95;  // probability each particle moves at least once
  double proposal_scale = 0.5;    // step sd multiplier on the ensemble sd
  int max_cycles = 50;            // cap on MH cycles per temperature
  int max_stages = 1000;
  std::uint64_t seed = 0;
};

// Weighted sample of the tempered posterior. After smc_sample returns, the
// particles are equally weighted at temperature 1 with cached log
// likelihoods; rows are particles, columns follow `names` (model parameters
// then the noise parameter).
struct ParticleEnsemble {
  std::vector<std::string> names;
  Eigen::MatrixXd log_theta;
  Eigen::VectorXd log_likelihoods;
  double temperature = 0.0;

  Eigen::MatrixXd thetas() const { return log_theta.array().exp().matrix(); }
};

struct SmcStage {
  double gamma = 0.0;
  double ess = 0.0;
  double acceptance = 0.0;  // pilot-cycle empirical rate
  int cycles = 0;
  int failed_evaluations = 0;  // particles whose likelihood threw
};

struct SmcResult {
  ParticleEnsemble ensemble;
  std::vector<SmcStage> stages;
};

// Effective sample size (sum w)^2 / sum w^2. Weights must be nonnegative
// with a positive sum.
double ess(const Eigen::VectorXd& weights);

// Annealed sequential Monte Carlo from the prior (gamma = 0) to the
// posterior (gamma = 1). Each temperature is chosen by bisection so the
// reweighted ESS hits ess_threshold * particles, followed by systematic
// resampling and adaptive random-walk Metropolis in log space. Runs are
// deterministic in the seed, independent of evaluation order.
SmcResult smc_sample(const Model& model, const Dataset& data,
                     const PriorSpec& prior, const SmcConfig& config);

}  // namespace sloppykit
