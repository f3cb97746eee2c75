#include "sloppykit/smc.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>

#include "sloppykit/likelihood.hpp"
#include "sloppykit/rng.hpp"

namespace sloppykit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kResampleTag = 0x7265730aULL;
constexpr std::uint64_t kMoveTag = 0x6d6f7665ULL;

Eigen::MatrixXd proposal_cholesky(const Eigen::MatrixXd& log_theta,
                                  double scale) {
  const auto m = log_theta.rows();
  const auto d = log_theta.cols();
  const Eigen::RowVectorXd mean = log_theta.colwise().mean();
  const Eigen::MatrixXd centered = log_theta.rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.adjoint() * centered) / static_cast<double>(m - 1);
  cov *= scale * scale;
  const double ref = std::max(cov.trace() / static_cast<double>(d), 1e-300);
  for (double jitter : {0.0, 1e-12, 1e-10, 1e-8, 1e-6}) {
    Eigen::LLT<Eigen::MatrixXd> llt(
        cov + jitter * ref * Eigen::MatrixXd::Identity(d, d));
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw NumericError("smc_sample: proposal covariance is not positive definite");
}

}  // namespace

double ess(const Eigen::VectorXd& weights) {
  if (weights.size() == 0) throw DomainError("ess: empty weight vector");
  double sum = 0.0, sum2 = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double w = weights(i);
    if (!(w >= 0.0)) throw DomainError("ess: weights must be nonnegative");
    sum += w;
    sum2 += w * w;
  }
  if (!(sum > 0.0)) throw DomainError("ess: weights sum to zero");
  return sum * sum / sum2;
}

SmcResult smc_sample(const Model& model, const Dataset& data,
                     const PriorSpec& prior, const SmcConfig& config) {
  const std::size_t dim = model.spec().dim() + 1;
  if (prior.dim() != dim)
    throw DomainError("smc_sample: prior must cover the model parameters "
                      "plus the noise parameter");
  const int M = config.particles;
  if (M < 2) throw DomainError("smc_sample: need at least 2 particles");
  if (!(config.ess_threshold > 0.0 && config.ess_threshold < 1.0))
    throw DomainError("smc_sample: ess_threshold must lie in (0, 1)");
  if (!(config.move_completion > 0.0 && config.move_completion < 1.0))
    throw DomainError("smc_sample: move_completion must lie in (0, 1)");
  if (!(config.proposal_scale > 0.0))
    throw DomainError("smc_sample: proposal_scale must be positive");

  const auto D = static_cast<Eigen::Index>(dim);
  auto loglik = [&](const ParameterVector& theta, bool& failed) {
    try {
      return log_likelihood(model, data, theta);
    } catch (const Error&) {
      failed = true;
      return -kInf;
    }
  };
  // MH targets the density of log theta, so the prior term carries the
  // Jacobian sum(z).
  auto logprior_z = [&](const Eigen::VectorXd& z, const ParameterVector& theta) {
    const double lp = prior.log_density(theta);
    return std::isfinite(lp) ? lp + z.sum() : -kInf;
  };

  Eigen::MatrixXd z(M, D);
  Eigen::VectorXd ll(M), lp(M);
  SmcResult result;
  {
    int failures = 0;
    int finite = 0;
    for (int m = 0; m < M; ++m) {
      const ParameterVector theta =
          prior.sample(config.seed, static_cast<std::uint64_t>(m));
      bool failed = false;
      const Eigen::VectorXd zm = theta.array().log().matrix();
      z.row(m) = zm.transpose();
      ll(m) = loglik(theta, failed);
      lp(m) = logprior_z(zm, theta);
      if (failed) ++failures;
      if (std::isfinite(ll(m))) ++finite;
    }
    if (finite == 0)
      throw NumericError(
          "smc_sample: every particle has zero likelihood; the data are "
          "incompatible with the prior support");
    result.stages.push_back({0.0, static_cast<double>(M), 0.0, 0, failures});
  }

  const double target = config.ess_threshold * M;
  double gamma = 0.0;

  for (int stage = 1; gamma < 1.0; ++stage) {
    if (stage > config.max_stages)
      throw NumericError("smc_sample: temperature ladder exceeded " +
                         std::to_string(config.max_stages) + " stages");

    // ESS of the incremental weights exp((g - gamma) * ll).
    const double ll_max = ll.maxCoeff();
    Eigen::VectorXd w(M);
    auto ess_at = [&](double g) {
      const double dg = g - gamma;
      for (int m = 0; m < M; ++m)
        w(m) = std::isfinite(ll(m)) ? std::exp(dg * (ll(m) - ll_max)) : 0.0;
      return ess(w);
    };

    double next = 1.0;
    if (ess_at(1.0) < target) {
      double lo = gamma + 1e-9 * (1.0 - gamma);
      double hi = 1.0;
      if (ess_at(lo) <= target) {
        next = lo;  // dead particles dominate; resampling will cull them
      } else {
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          (ess_at(mid) >= target ? lo : hi) = mid;
        }
        next = 0.5 * (lo + hi);
      }
    }
    const double stage_ess = ess_at(next);

    // Systematic resampling to equal weights.
    {
      const double wsum = w.sum();
      auto gen = substream(config.seed, {kResampleTag, static_cast<std::uint64_t>(stage)});
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double u0 = unif(gen);
      Eigen::MatrixXd z_new(M, D);
      Eigen::VectorXd ll_new(M), lp_new(M);
      double cum = w(0);
      int idx = 0;
      for (int i = 0; i < M; ++i) {
        const double pos = (i + u0) / M * wsum;
        while (cum < pos && idx < M - 1) cum += w(++idx);
        z_new.row(i) = z.row(idx);
        ll_new(i) = ll(idx);
        lp_new(i) = lp(idx);
      }
      z = std::move(z_new);
      ll = std::move(ll_new);
      lp = std::move(lp_new);
    }

    const Eigen::MatrixXd chol = proposal_cholesky(z, config.proposal_scale);

    // Adaptive Metropolis: a pilot cycle estimates the acceptance rate,
    // which sets how many cycles give each particle probability
    // move_completion of at least one accepted move.
    int cycles = 1;
    int failures = 0;
    double pilot_rate = 0.0;
    for (int cycle = 0; cycle < cycles; ++cycle) {
      int accepted = 0;
      for (int m = 0; m < M; ++m) {
        auto gen = substream(config.seed,
                             {kMoveTag, static_cast<std::uint64_t>(stage),
                              static_cast<std::uint64_t>(cycle),
                              static_cast<std::uint64_t>(m)});
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd eta(D);
        for (Eigen::Index i = 0; i < D; ++i) eta(i) = normal(gen);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double u = unif(gen);

        const Eigen::VectorXd zp = z.row(m).transpose() + chol * eta;
        const ParameterVector thetap = from_log_space(zp);
        const double lpp = logprior_z(zp, thetap);
        if (!std::isfinite(lpp)) continue;
        bool failed = false;
        const double llp = loglik(thetap, failed);
        if (failed) ++failures;
        const double log_ratio = next * (llp - ll(m)) + (lpp - lp(m));
        if (std::log(u) < log_ratio) {
          z.row(m) = zp.transpose();
          ll(m) = llp;
          lp(m) = lpp;
          ++accepted;
        }
      }
      if (cycle == 0) {
        pilot_rate = static_cast<double>(accepted) / M;
        if (accepted == 0)
          throw NumericError(
              "smc_sample: no Metropolis proposal accepted in the pilot "
              "cycle at temperature " + std::to_string(next));
        if (pilot_rate >= 1.0) {
          cycles = 1;
        } else {
          const double needed = std::ceil(std::log1p(-config.move_completion) /
                                          std::log1p(-pilot_rate));
          cycles = std::min(config.max_cycles,
                            std::max(1, static_cast<int>(needed)));
        }
      }
    }

    result.stages.push_back({next, stage_ess, pilot_rate, cycles, failures});
    gamma = next;
  }

  result.ensemble.names = model.spec().estimated_names();
  result.ensemble.names.push_back(data.heteroscedastic() ? "epsilon" : "sigma");
  result.ensemble.log_theta = std::move(z);
  result.ensemble.log_likelihoods = std::move(ll);
  result.ensemble.temperature = 1.0;
  return result;
}

}  // namespace sloppykit
