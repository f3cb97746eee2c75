#pragma once

#include <cstdint>

#include "sloppykit/dataset.hpp"
#include "sloppykit/model.hpp"

namespace sloppykit {

// Synthetic observations y_k ~ N(y_model_k, (epsilon * y_model_k)^2),
// truncated at zero by rejection. Each grid point draws from its own
// substream of `seed`, so the dataset is independent of evaluation order.
Dataset synth_heteroscedastic(const Model& model, const ParameterVector& theta,
                              const ObservationGrid& grid, double epsilon,
                              std::uint64_t seed);

// Synthetic observations y_k ~ N(y_model_k, sigma^2), untruncated.
Dataset synth_homoscedastic(const Model& model, const ParameterVector& theta,
                            const ObservationGrid& grid, double sigma,
                            std::uint64_t seed);

}  // namespace sloppykit
