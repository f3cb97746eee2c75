#include "sloppykit/sensitivity.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sloppykit/finite_difference.hpp"
#include "sloppykit/likelihood.hpp"
#include "sloppykit/rng.hpp"

namespace sloppykit {

namespace {

// Splits theta_star into model parameters and the fixed trailing noise
// value, validating against the model dimension.
Eigen::VectorXd model_block(const Model& model,
                            const Eigen::VectorXd& theta_star,
                            const char* where) {
  const auto d = static_cast<Eigen::Index>(model.spec().dim());
  if (theta_star.size() != d + 1)
    throw DomainError(std::string(where) +
                      ": expected the model parameters plus the trailing "
                      "noise parameter");
  return theta_star.head(d);
}

Eigen::VectorXd with_noise(const Eigen::VectorXd& theta_model, double noise) {
  Eigen::VectorXd full(theta_model.size() + 1);
  full << theta_model, noise;
  return full;
}

Eigen::MatrixXd pairwise_mean(std::vector<Eigen::MatrixXd>& terms) {
  // Pairwise reduction keeps the sum independent of evaluation order.
  const std::size_t n = terms.size();
  for (std::size_t width = 1; width < n; width *= 2)
    for (std::size_t i = 0; i + width < n; i += 2 * width)
      terms[i] += terms[i + width];
  return terms[0] / static_cast<double>(n);
}

}  // namespace

std::string matrix_kind_name(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::H: return "H";
    case MatrixKind::L: return "L";
    case MatrixKind::P: return "P";
    case MatrixKind::G: return "G";
  }
  throw DomainError("matrix_kind_name: unknown kind");
}

SensitivityMatrix hessian_H(const Model& model, const Dataset& data,
                            const Eigen::VectorXd& theta_star, double delta) {
  const Eigen::VectorXd theta_model =
      model_block(model, theta_star, "hessian_H");
  const double noise = theta_star(theta_star.size() - 1);
  auto cost = [&](const Eigen::VectorXd& tm) {
    try {
      return -log_likelihood(model, data, with_noise(tm, noise));
    } catch (const Error& e) {
      throw NumericError(std::string("hessian_H: stencil evaluation failed: ") +
                         e.what());
    }
  };
  Eigen::MatrixXd h = fd_log_hessian(cost, theta_model, delta);
  return {MatrixKind::H, std::move(h), model.spec().estimated_names(), ""};
}

SensitivityMatrix lm_hessian_L(const Model& model, const Dataset& data,
                               const Eigen::VectorXd& theta_star,
                               double delta) {
  const Eigen::VectorXd theta_model =
      model_block(model, theta_star, "lm_hessian_L");
  const double noise = theta_star(theta_star.size() - 1);
  auto resid = [&](const Eigen::VectorXd& tm) {
    try {
      return residuals(model, data, with_noise(tm, noise));
    } catch (const Error& e) {
      throw NumericError(
          std::string("lm_hessian_L: stencil evaluation failed: ") + e.what());
    }
  };
  const Eigen::MatrixXd jac = fd_log_jacobian(resid, theta_model, delta);
  Eigen::MatrixXd l = jac.transpose() * jac;
  l = 0.5 * (l + l.transpose()).eval();
  return {MatrixKind::L, std::move(l), model.spec().estimated_names(), ""};
}

Eigen::MatrixXd sample_log_covariance(const Eigen::MatrixXd& log_samples) {
  if (log_samples.rows() < 2)
    throw DomainError(
        "sample_log_covariance: need at least 2 samples for an unbiased "
        "covariance");
  const Eigen::RowVectorXd mean = log_samples.colwise().mean();
  const Eigen::MatrixXd centered = log_samples.rowwise() - mean;
  return (centered.adjoint() * centered) /
         static_cast<double>(log_samples.rows() - 1);
}

Eigen::MatrixXd sample_log_covariance(const ParticleEnsemble& ensemble) {
  const auto cols = ensemble.log_theta.cols();
  if (cols < 2)
    throw DomainError(
        "sample_log_covariance: ensemble must hold model parameters plus "
        "the noise coordinate");
  return sample_log_covariance(
      Eigen::MatrixXd(ensemble.log_theta.leftCols(cols - 1)));
}

SensitivityMatrix pca_matrix_P(const ParticleEnsemble& ensemble) {
  const Eigen::MatrixXd cov = sample_log_covariance(ensemble);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw NumericError("pca_matrix_P: eigendecomposition failed");
  const Eigen::VectorXd ev = solver.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw NumericError(
        "pca_matrix_P: posterior log-covariance is singular or "
        "ill-conditioned (condition number above 1e12); use more particles "
        "or remove a redundant parameter");
  Eigen::MatrixXd p = solver.eigenvectors() *
                      ev.cwiseInverse().asDiagonal() *
                      solver.eigenvectors().transpose();
  p = 0.5 * (p + p.transpose()).eval();
  std::vector<std::string> names(ensemble.names.begin(),
                                 ensemble.names.end() - 1);
  return {MatrixKind::P, std::move(p), std::move(names), ""};
}

SensitivityMatrix lis_matrix_G(const ParticleEnsemble& ensemble,
                               const PriorSpec& prior, const Model& model,
                               const Dataset& data, double delta,
                               int subsample, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(model.spec().dim());
  if (ensemble.log_theta.cols() != d + 1)
    throw DomainError("lis_matrix_G: ensemble does not match the model "
                      "parameter count plus noise");
  if (prior.dim() != static_cast<std::size_t>(d) + 1)
    throw DomainError("lis_matrix_G: prior does not match the model "
                      "parameter count plus noise");
  if (subsample < 1) throw DomainError("lis_matrix_G: subsample must be >= 1");

  const Eigen::MatrixXd omega =
      prior.log_space_covariance().topLeftCorner(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success)
    throw NumericError(
        "lis_matrix_G: prior log-space covariance is not positive definite");
  const Eigen::MatrixXd lp = llt.matrixL();

  // Selection sampling keeps row order and is deterministic for the seed.
  const int total = static_cast<int>(ensemble.log_theta.rows());
  std::vector<int> picked;
  if (subsample >= total) {
    picked.resize(total);
    for (int i = 0; i < total; ++i) picked[i] = i;
  } else {
    auto gen = substream(seed, {0x737562ULL});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int needed = subsample;
    for (int i = 0; i < total && needed > 0; ++i) {
      if (unif(gen) * (total - i) < needed) {
        picked.push_back(i);
        --needed;
      }
    }
  }

  std::vector<Eigen::MatrixXd> terms;
  terms.reserve(picked.size());
  int dropped = 0;
  for (int idx : picked) {
    const Eigen::VectorXd theta =
        ensemble.log_theta.row(idx).array().exp().matrix();
    try {
      SensitivityMatrix h = hessian_H(model, data, theta, delta);
      terms.push_back(lp.transpose() * h.values * lp);
    } catch (const Error&) {
      ++dropped;
    }
  }
  if (terms.empty() ||
      dropped * 10 > static_cast<int>(picked.size()))
    throw NumericError("lis_matrix_G: " + std::to_string(dropped) + " of " +
                       std::to_string(picked.size()) +
                       " Hessian evaluations failed (more than 10%)");

  Eigen::MatrixXd g = pairwise_mean(terms);
  g = 0.5 * (g + g.transpose()).eval();
  return {MatrixKind::G, std::move(g), model.spec().estimated_names(), ""};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose(
    const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
    throw DomainError("eigendecompose: matrix must be square and non-empty");
  if (!matrix.allFinite())
    throw NumericError("eigendecompose: matrix has non-finite entries");
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigendecompose: decomposition did not converge");

  const Eigen::Index n = sym.rows();
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Eigen sorts ascending; flip to descending.
    const Eigen::Index src = n - 1 - i;
    values(i) = solver.eigenvalues()(src);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    vectors.col(i) = v;
  }
  return {std::move(values), std::move(vectors)};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose(
    const SensitivityMatrix& matrix) {
  return eigendecompose(matrix.values);
}

}  // namespace sloppykit
