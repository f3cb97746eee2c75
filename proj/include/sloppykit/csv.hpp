#pragma once

#include <string>

#include "sloppykit/dataset.hpp"
#include "sloppykit/eigenparameters.hpp"
#include "sloppykit/smc.hpp"

namespace sloppykit {

// Locale-independent decimal text, 17 significant digits, round-trip exact.
std::string format_double(double value);
double parse_double(const std::string& text);

// Dataset CSV: optional leading comment lines carry the noise model and
// provenance, then a `x1..xn,channel,y_obs` header and one row per record.
//
//   # noise,heteroscedastic,0.25
//   # seed,42
//   # theta,100,5,146.7
//   x1,channel,y_obs
//   10,0,361.27
void write_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

// Ensemble CSV: linear-space particles, one column per parameter plus the
// particle's log-likelihood.
void write_ensemble_csv(const ParticleEnsemble& ensemble,
                        const std::string& path);
ParticleEnsemble read_ensemble_csv(const std::string& path);

// Plot-ready eigenvalue table: rank,lambda,lambda_rel rows sorted by rank.
std::string emit_spectrum_table(const SensitivityReport& report);

}  // namespace sloppykit
