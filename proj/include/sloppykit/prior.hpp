#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sloppykit/params.hpp"

namespace sloppykit {

// Uniform in natural space on [lo, hi] for one coordinate.
struct UniformComponent {
  std::size_t index;
  double lo, hi;
};

// Multivariate log-normal over a set of coordinates: ln theta_I ~
// N(mu_log, cov_log). A single coordinate is the scalar special case.
struct LogNormalComponent {
  std::vector<std::size_t> indices;
  Eigen::VectorXd mu_log;
  Eigen::MatrixXd cov_log;
};

using PriorComponent = std::variant<UniformComponent, LogNormalComponent>;

// Joint prior over all estimated parameters (model parameters plus the
// trailing noise parameter). Every coordinate is covered by exactly one
// component.
class PriorSpec {
 public:
  PriorSpec(std::size_t dim, std::vector<PriorComponent> components);

  std::size_t dim() const { return dim_; }
  const std::vector<PriorComponent>& components() const { return components_; }

  // Joint log density in natural space; -inf outside the support.
  double log_density(const ParameterVector& theta) const;

  // The draw for particle `index` under `seed`; independent of the order in
  // which indices are requested.
  ParameterVector sample(std::uint64_t seed, std::uint64_t index) const;

  // Log-space covariance: log-normal blocks verbatim, uniform components as
  // the diagonal surrogate Var(ln U(lo, hi)).
  Eigen::MatrixXd log_space_covariance() const;

  // Componentwise median: midpoint for uniforms, exp(mu) for log-normals.
  ParameterVector median() const;

  // Box support in natural space: [lo, hi] for uniforms and
  // exp(mu +- 6 sd) for log-normal coordinates.
  std::pair<ParameterVector, ParameterVector> support_bounds() const;

 private:
  std::size_t dim_;
  std::vector<PriorComponent> components_;
  // Cached per log-normal component: Cholesky factor and log det of cov.
  struct BlockCache {
    Eigen::MatrixXd chol;
    double log_det = 0.0;
  };
  std::vector<BlockCache> cache_;
};

double log_prior(const PriorSpec& prior, const ParameterVector& theta);

// M prior draws, one row per particle.
Eigen::MatrixXd prior_sample(const PriorSpec& prior, int count,
                             std::uint64_t seed);

// Lower Cholesky factor of the full log-space covariance.
Eigen::MatrixXd prior_cholesky(const PriorSpec& prior);

// Mean and variance of ln U for U ~ Uniform(lo, hi), in closed form.
double log_uniform_mean(double lo, double hi);
double log_uniform_variance(double lo, double hi);

}  // namespace sloppykit
