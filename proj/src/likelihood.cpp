#include "sloppykit/likelihood.hpp"

#include <cmath>

namespace sloppykit {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

struct Split {
  ParameterVector theta_model;
  double noise;
};

Split split_theta(const Model& model, const Dataset& data,
                  const ParameterVector& theta_full) {
  const auto d = static_cast<Eigen::Index>(model.spec().dim());
  if (theta_full.size() != d + 1)
    throw DomainError(
        "expected model parameters plus a trailing noise parameter (" +
        std::to_string(d + 1) + " values)");
  Split s{theta_full.head(d), theta_full(d)};
  if (!(s.noise > 0.0))
    throw DomainError(data.heteroscedastic()
                          ? "noise parameter epsilon must be positive"
                          : "noise parameter sigma must be positive");
  return s;
}

}  // namespace

double log_likelihood(const Model& model, const Dataset& data,
                      const ParameterVector& theta_full) {
  const Split s = split_theta(model, data, theta_full);
  const auto y = model.predict(data.grid(), s.theta_model);
  const auto& records = data.records();
  double ll = 0.0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    double sd;
    if (data.heteroscedastic()) {
      if (!(y[k] > 0.0))
        throw LikelihoodError(
            "relative noise requires positive model output; record " +
            std::to_string(k) + " predicts " + std::to_string(y[k]));
      sd = s.noise * y[k];
    } else {
      sd = s.noise;
    }
    const double r = (records[k].y_obs - y[k]) / sd;
    ll += -0.5 * kLogTwoPi - std::log(sd) - 0.5 * r * r;
  }
  return ll;
}

double cost_function(const Model& model, const Dataset& data,
                     const ParameterVector& theta_full) {
  return -log_likelihood(model, data, theta_full);
}

Eigen::VectorXd residuals(const Model& model, const Dataset& data,
                          const ParameterVector& theta_full) {
  const Split s = split_theta(model, data, theta_full);
  const auto y = model.predict(data.grid(), s.theta_model);
  const auto& records = data.records();
  Eigen::VectorXd r(static_cast<Eigen::Index>(records.size()));
  for (std::size_t k = 0; k < records.size(); ++k) {
    double sd;
    if (data.heteroscedastic()) {
      if (!(y[k] > 0.0))
        throw LikelihoodError(
            "relative noise requires positive model output; record " +
            std::to_string(k) + " predicts " + std::to_string(y[k]));
      sd = s.noise * y[k];
    } else {
      sd = s.noise;
    }
    r(static_cast<Eigen::Index>(k)) = (records[k].y_obs - y[k]) / sd;
  }
  return r;
}

}  // namespace sloppykit
