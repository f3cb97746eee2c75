#pragma once

#include <Eigen/Core>

#include "sloppykit/dataset.hpp"
#include "sloppykit/errors.hpp"
#include "sloppykit/model.hpp"

namespace sloppykit {

// Model output incompatible with the noise model (nonpositive prediction
// under relative noise).
struct LikelihoodError : Error {
  using Error::Error;
};

// Gaussian log likelihood. `theta_full` is the model parameter vector with
// the noise parameter (epsilon or sigma, matching the dataset's noise kind)
// appended as the trailing coordinate. Under heteroscedastic noise
// sd_k = epsilon * y_model_k depends on theta, so the ln sd_k terms do too.
double log_likelihood(const Model& model, const Dataset& data,
                      const ParameterVector& theta_full);

// Negative log likelihood.
double cost_function(const Model& model, const Dataset& data,
                     const ParameterVector& theta_full);

// Standardized residuals r_k = (y_obs_k - y_model_k) / sd_k(theta), in
// record order.
Eigen::VectorXd residuals(const Model& model, const Dataset& data,
                          const ParameterVector& theta_full);

}  // namespace sloppykit
