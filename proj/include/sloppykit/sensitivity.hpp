#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sloppykit/dataset.hpp"
#include "sloppykit/model.hpp"
#include "sloppykit/prior.hpp"
#include "sloppykit/smc.hpp"

namespace sloppykit {

enum class MatrixKind { H, L, P, G };

std::string matrix_kind_name(MatrixKind kind);

// A d x d sensitivity matrix over log parameters. The noise parameter is
// never part of d: its row and column are omitted by construction.
struct SensitivityMatrix {
  MatrixKind kind;
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  std::string context;
};

// Log-space Hessian of the negative log-likelihood at theta_star by central
// differences. theta_star carries the trailing noise parameter, which is
// held fixed; only the model parameters are differentiated.
SensitivityMatrix hessian_H(const Model& model, const Dataset& data,
                            const Eigen::VectorXd& theta_star,
                            double delta = 1e-3);

// Levenberg-Marquardt approximation J^T J, with J the central-difference
// Jacobian of the weighted residuals in log space. Positive semidefinite.
SensitivityMatrix lm_hessian_L(const Model& model, const Dataset& data,
                               const Eigen::VectorXd& theta_star,
                               double delta = 1e-3);

// Unbiased sample covariance of the rows of a log-parameter matrix.
Eigen::MatrixXd sample_log_covariance(const Eigen::MatrixXd& log_samples);

// Same, over an ensemble with the trailing noise coordinate dropped.
Eigen::MatrixXd sample_log_covariance(const ParticleEnsemble& ensemble);

// Inverse of the ensemble's log-space sample covariance.
SensitivityMatrix pca_matrix_P(const ParticleEnsemble& ensemble);

// Prior-preconditioned average Hessian: mean of L_p^T H(theta_m) L_p over
// ensemble samples, with L_p the Cholesky factor of the prior's log-space
// covariance restricted to the model parameters. At most `subsample`
// Hessians are evaluated (chosen by seeded selection sampling without
// replacement); samples where the Hessian fails are dropped, and more than
// 10% drops is an error.
SensitivityMatrix lis_matrix_G(const ParticleEnsemble& ensemble,
                               const PriorSpec& prior, const Model& model,
                               const Dataset& data, double delta = 1e-3,
                               int subsample = 500,
                               std::uint64_t seed = 0x4c4953ULL);

// Symmetric eigendecomposition with eigenvalues sorted descending and each
// eigenvector sign-fixed so its largest-magnitude component is positive.
// Columns of the returned matrix are the eigenvectors.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose(
    const Eigen::MatrixXd& matrix);
std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose(
    const SensitivityMatrix& matrix);

}  // namespace sloppykit
