#include "sloppykit/prior.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "sloppykit/errors.hpp"
#include "sloppykit/rng.hpp"

namespace sloppykit {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;
constexpr std::uint64_t kPriorTag = 0x7072696f72ULL;  // "prior"
}

double log_uniform_mean(double lo, double hi) {
  return (hi * (std::log(hi) - 1.0) - lo * (std::log(lo) - 1.0)) / (hi - lo);
}

double log_uniform_variance(double lo, double hi) {
  auto g = [](double u) {
    const double l = std::log(u);
    return u * (l * l - 2.0 * l + 2.0);
  };
  const double m = log_uniform_mean(lo, hi);
  return (g(hi) - g(lo)) / (hi - lo) - m * m;
}

PriorSpec::PriorSpec(std::size_t dim, std::vector<PriorComponent> components)
    : dim_(dim), components_(std::move(components)) {
  std::vector<int> covered(dim_, 0);
  auto mark = [&](std::size_t i) {
    if (i >= dim_)
      throw DomainError("prior component index " + std::to_string(i) +
                        " out of range");
    if (covered[i]++)
      throw DomainError("parameter coordinate " + std::to_string(i) +
                        " covered by more than one prior component");
  };
  for (const auto& c : components_) {
    if (const auto* u = std::get_if<UniformComponent>(&c)) {
      if (!(u->lo > 0.0 && u->hi > u->lo))
        throw DomainError("uniform prior requires 0 < lo < hi");
      mark(u->index);
      cache_.emplace_back();
    } else {
      const auto& b = std::get<LogNormalComponent>(c);
      const auto n = static_cast<Eigen::Index>(b.indices.size());
      if (n == 0) throw DomainError("log-normal prior block has no indices");
      if (b.mu_log.size() != n || b.cov_log.rows() != n || b.cov_log.cols() != n)
        throw DomainError("log-normal prior block has inconsistent sizes");
      for (std::size_t i : b.indices) mark(i);
      Eigen::LLT<Eigen::MatrixXd> llt(b.cov_log);
      if (llt.info() != Eigen::Success)
        throw DomainError("log-normal prior covariance is not positive definite");
      BlockCache bc;
      bc.chol = llt.matrixL();
      bc.log_det = 2.0 * bc.chol.diagonal().array().log().sum();
      cache_.push_back(std::move(bc));
    }
  }
  for (std::size_t i = 0; i < dim_; ++i)
    if (!covered[i])
      throw DomainError("parameter coordinate " + std::to_string(i) +
                        " has no prior component");
}

double PriorSpec::log_density(const ParameterVector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim_)
    throw DomainError("prior log_density: wrong parameter dimension");
  double total = 0.0;
  for (std::size_t c = 0; c < components_.size(); ++c) {
    if (const auto* u = std::get_if<UniformComponent>(&components_[c])) {
      const double v = theta(static_cast<Eigen::Index>(u->index));
      if (!(v >= u->lo && v <= u->hi))
        return -std::numeric_limits<double>::infinity();
      total -= std::log(u->hi - u->lo);
    } else {
      const auto& b = std::get<LogNormalComponent>(components_[c]);
      const auto n = static_cast<Eigen::Index>(b.indices.size());
      Eigen::VectorXd z(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = theta(static_cast<Eigen::Index>(b.indices[i]));
        if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
        z(i) = std::log(v);
      }
      const Eigen::VectorXd dev = z - b.mu_log;
      const Eigen::VectorXd half =
          cache_[c].chol.triangularView<Eigen::Lower>().solve(dev);
      total += -z.sum() - 0.5 * n * kLogTwoPi - 0.5 * cache_[c].log_det -
               0.5 * half.squaredNorm();
    }
  }
  return total;
}

ParameterVector PriorSpec::sample(std::uint64_t seed,
                                  std::uint64_t index) const {
  auto gen = substream(seed, {kPriorTag, index});
  ParameterVector theta(static_cast<Eigen::Index>(dim_));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t c = 0; c < components_.size(); ++c) {
    if (const auto* u = std::get_if<UniformComponent>(&components_[c])) {
      theta(static_cast<Eigen::Index>(u->index)) =
          u->lo + unif(gen) * (u->hi - u->lo);
    } else {
      const auto& b = std::get<LogNormalComponent>(components_[c]);
      const auto n = static_cast<Eigen::Index>(b.indices.size());
      Eigen::VectorXd eta(n);
      for (Eigen::Index i = 0; i < n; ++i) eta(i) = normal(gen);
      const Eigen::VectorXd z = b.mu_log + cache_[c].chol * eta;
      for (Eigen::Index i = 0; i < n; ++i)
        theta(static_cast<Eigen::Index>(b.indices[i])) = std::exp(z(i));
    }
  }
  return theta;
}

Eigen::MatrixXd PriorSpec::log_space_covariance() const {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  for (const auto& c : components_) {
    if (const auto* u = std::get_if<UniformComponent>(&c)) {
      const auto i = static_cast<Eigen::Index>(u->index);
      omega(i, i) = log_uniform_variance(u->lo, u->hi);
    } else {
      const auto& b = std::get<LogNormalComponent>(c);
      for (std::size_t r = 0; r < b.indices.size(); ++r)
        for (std::size_t s = 0; s < b.indices.size(); ++s)
          omega(static_cast<Eigen::Index>(b.indices[r]),
                static_cast<Eigen::Index>(b.indices[s])) =
              b.cov_log(static_cast<Eigen::Index>(r),
                        static_cast<Eigen::Index>(s));
    }
  }
  return omega;
}

ParameterVector PriorSpec::median() const {
  ParameterVector m(static_cast<Eigen::Index>(dim_));
  for (const auto& c : components_) {
    if (const auto* u = std::get_if<UniformComponent>(&c)) {
      m(static_cast<Eigen::Index>(u->index)) = 0.5 * (u->lo + u->hi);
    } else {
      const auto& b = std::get<LogNormalComponent>(c);
      for (std::size_t i = 0; i < b.indices.size(); ++i)
        m(static_cast<Eigen::Index>(b.indices[i])) =
            std::exp(b.mu_log(static_cast<Eigen::Index>(i)));
    }
  }
  return m;
}

std::pair<ParameterVector, ParameterVector> PriorSpec::support_bounds() const {
  ParameterVector lo(static_cast<Eigen::Index>(dim_));
  ParameterVector hi(static_cast<Eigen::Index>(dim_));
  for (const auto& c : components_) {
    if (const auto* u = std::get_if<UniformComponent>(&c)) {
      lo(static_cast<Eigen::Index>(u->index)) = u->lo;
      hi(static_cast<Eigen::Index>(u->index)) = u->hi;
    } else {
      const auto& b = std::get<LogNormalComponent>(c);
      for (std::size_t i = 0; i < b.indices.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double sd = std::sqrt(b.cov_log(ii, ii));
        lo(static_cast<Eigen::Index>(b.indices[i])) =
            std::exp(b.mu_log(ii) - 6.0 * sd);
        hi(static_cast<Eigen::Index>(b.indices[i])) =
            std::exp(b.mu_log(ii) + 6.0 * sd);
      }
    }
  }
  return {lo, hi};
}

double log_prior(const PriorSpec& prior, const ParameterVector& theta) {
  return prior.log_density(theta);
}

Eigen::MatrixXd prior_sample(const PriorSpec& prior, int count,
                             std::uint64_t seed) {
  if (count <= 0) throw DomainError("prior_sample: count must be positive");
  Eigen::MatrixXd out(count, static_cast<Eigen::Index>(prior.dim()));
  for (int m = 0; m < count; ++m)
    out.row(m) = prior.sample(seed, static_cast<std::uint64_t>(m)).transpose();
  return out;
}

Eigen::MatrixXd prior_cholesky(const PriorSpec& prior) {
  Eigen::LLT<Eigen::MatrixXd> llt(prior.log_space_covariance());
  if (llt.info() != Eigen::Success)
    throw NumericError("prior log-space covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace sloppykit
