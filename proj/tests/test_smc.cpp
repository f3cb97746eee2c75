#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sloppykit/errors.hpp"
#include "sloppykit/models/michaelis_menten.hpp"
#include "sloppykit/prior.hpp"
#include "sloppykit/smc.hpp"
#include "sloppykit/synth.hpp"

using namespace sloppykit;

namespace {

PriorComponent uniform(std::size_t index, double lo, double hi) {
  return UniformComponent{index, lo, hi};
}

PriorComponent log_normal(std::size_t index, double mu, double var) {
  Eigen::VectorXd m(1);
  m[0] = mu;
  Eigen::MatrixXd c(1, 1);
  c(0, 0) = var;
  return LogNormalComponent{{index}, m, c};
}

// A parameter the likelihood pins to a known constant: log-normal with
// negligible spread, so "known sigma" setups stay within the estimated
// parameter contract.
PriorComponent pinned(std::size_t index, double value) {
  return log_normal(index, std::log(value), 1e-20);
}

Eigen::VectorXd weights(std::initializer_list<double> values) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) w[i++] = x;
  return w;
}

// Observable ln(theta_0), constant across records: Gaussian observations of
// a log-parameter, conjugate to a log-normal prior.
class LogMeanModel : public Model {
 public:
  LogMeanModel() : spec_(ParameterSpec({{"theta", "", 1.0, true}})) {}
  std::string name() const override { return "log_mean"; }
  const ParameterSpec& spec() const override { return spec_; }
  std::vector<std::string> channel_names() const override { return {"y"}; }
  std::vector<double> predict(const ObservationGrid& grid,
                              const ParameterVector& theta) const override {
    return std::vector<double>(grid.size(), std::log(theta[0]));
  }

 private:
  ParameterSpec spec_;
};

// Observable independent of the parameters: the likelihood carries no
// information, so the posterior must reproduce the prior.
class ConstantModel : public Model {
 public:
  ConstantModel()
      : spec_(ParameterSpec({{"a", "", 2.0, true}, {"b", "", 2.0, true}})) {}
  std::string name() const override { return "constant"; }
  const ParameterSpec& spec() const override { return spec_; }
  std::vector<std::string> channel_names() const override { return {"y"}; }
  std::vector<double> predict(const ObservationGrid& grid,
                              const ParameterVector&) const override {
    return std::vector<double>(grid.size(), 5.0);
  }

 private:
  ParameterSpec spec_;
};

// Observable ln(theta_0) + x ln(theta_1): Bayesian linear regression in log
// space, with an exact Gaussian posterior to compare against.
class LogLinearModel : public Model {
 public:
  LogLinearModel()
      : spec_(ParameterSpec({{"a", "", 1.0, true}, {"b", "", 1.0, true}})) {}
  std::string name() const override { return "log_linear"; }
  const ParameterSpec& spec() const override { return spec_; }
  std::vector<std::string> channel_names() const override { return {"y"}; }
  std::vector<double> predict(const ObservationGrid& grid,
                              const ParameterVector& theta) const override {
    std::vector<double> out;
    out.reserve(grid.size());
    for (const auto& pt : grid)
      out.push_back(std::log(theta[0]) + pt.x[0] * std::log(theta[1]));
    return out;
  }

 private:
  ParameterSpec spec_;
};

// Always-invalid observable under relative noise (y_model = 0), so every
// particle's likelihood evaluation fails.
class ZeroModel : public Model {
 public:
  ZeroModel() : spec_(ParameterSpec({{"a", "", 1.0, true}})) {}
  std::string name() const override { return "zero"; }
  const ParameterSpec& spec() const override { return spec_; }
  std::vector<std::string> channel_names() const override { return {"y"}; }
  std::vector<double> predict(const ObservationGrid& grid,
                              const ParameterVector&) const override {
    return std::vector<double>(grid.size(), 0.0);
  }

 private:
  ParameterSpec spec_;
};

Dataset scalar_dataset(std::initializer_list<double> ys, NoiseSpec noise) {
  std::vector<DataRecord> records;
  for (double y : ys) {
    Eigen::VectorXd x(1);
    x[0] = 0.0;
    records.push_back({x, 0, y});
  }
  return Dataset(std::move(records), noise);
}

}  // namespace

TEST_CASE("ess of uniform weights equals the particle count") {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(100, 0.37);
  CHECK(ess(w) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("ess of a one-hot weight vector is one") {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(25);
  w[7] = 3.5;
  CHECK(ess(w) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ess hand value for weights (2,1,1)") {
  CHECK(ess(weights({2.0, 1.0, 1.0})) ==
        doctest::Approx(16.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("ess rejects empty, negative, and all-zero weights") {
  CHECK_THROWS_AS(ess(Eigen::VectorXd()), DomainError);
  CHECK_THROWS_AS(ess(weights({1.0, -0.5})), DomainError);
  CHECK_THROWS_AS(ess(weights({0.0, 0.0, 0.0})), DomainError);
}

TEST_CASE("conjugate scalar posterior matches the normal-normal update") {
  // y_i ~ N(ln theta, 0.5^2), ln theta ~ N(0, 1). With n = 5 and sum y =
  // 1.5 the posterior over ln theta is N(6/21, 1/21).
  LogMeanModel model;
  Dataset data =
      scalar_dataset({0.8, -0.1, 0.45, 0.2, 0.15}, Homoscedastic{0.5});

  PriorSpec prior(2, {log_normal(0, 0.0, 1.0), pinned(1, 0.5)});
  SmcConfig config;
  config.particles = 2000;
  config.seed = 77;
  const SmcResult result = smc_sample(model, data, prior, config);

  const auto& ensemble = result.ensemble;
  REQUIRE(ensemble.log_theta.rows() == 2000);
  REQUIRE(ensemble.log_theta.cols() == 2);
  CHECK(ensemble.names == std::vector<std::string>{"theta", "sigma"});
  CHECK(ensemble.temperature == 1.0);

  const double m1 = 6.0 / 21.0;
  const double v1 = 1.0 / 21.0;
  const Eigen::VectorXd z = ensemble.log_theta.col(0);
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / (z.size() - 1);
  const double se_mean = std::sqrt(v1 / 2000.0);
  const double se_var = v1 * std::sqrt(2.0 / 1999.0);
  CHECK(std::abs(mean - m1) < 3.0 * se_mean);
  CHECK(std::abs(var - v1) < 3.0 * se_var);

  // The pinned coordinate stays put.
  CHECK(ensemble.log_theta.col(1).minCoeff() ==
        doctest::Approx(std::log(0.5)).epsilon(1e-6));
  CHECK(ensemble.log_theta.col(1).maxCoeff() ==
        doctest::Approx(std::log(0.5)).epsilon(1e-6));

  // Cached log likelihoods match a direct re-evaluation at the particle.
  const ParameterVector theta0 = ensemble.thetas().row(0).transpose();
  double direct = 0.0;
  const auto ys = {0.8, -0.1, 0.45, 0.2, 0.15};
  for (double y : ys) {
    const double r = (y - std::log(theta0[0])) / theta0[1];
    direct += -std::log(theta0[1]) - 0.5 * std::log(2.0 * M_PI) - 0.5 * r * r;
  }
  CHECK(ensemble.log_likelihoods[0] == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("temperature ladder rises strictly from zero to exactly one") {
  LogMeanModel model;
  Dataset data =
      scalar_dataset({0.8, -0.1, 0.45, 0.2, 0.15}, Homoscedastic{0.5});
  PriorSpec prior(2, {log_normal(0, 0.0, 1.0), pinned(1, 0.5)});
  SmcConfig config;
  config.particles = 500;
  config.seed = 41;
  const SmcResult result = smc_sample(model, data, prior, config);

  REQUIRE(result.stages.size() >= 2);
  CHECK(result.stages.front().gamma == 0.0);
  CHECK(result.stages.back().gamma == 1.0);
  for (std::size_t i = 1; i < result.stages.size(); ++i) {
    CHECK(result.stages[i].gamma > result.stages[i - 1].gamma);
    CHECK(result.stages[i].ess > 0.0);
    CHECK(result.stages[i].ess <= 500.0 + 1e-9);
  }
}

TEST_CASE("smc runs are deterministic in the seed") {
  LogMeanModel model;
  Dataset data =
      scalar_dataset({0.8, -0.1, 0.45, 0.2, 0.15}, Homoscedastic{0.5});
  PriorSpec prior(2, {log_normal(0, 0.0, 1.0), pinned(1, 0.5)});
  SmcConfig config;
  config.particles = 400;
  config.seed = 2024;

  const SmcResult a = smc_sample(model, data, prior, config);
  const SmcResult b = smc_sample(model, data, prior, config);
  CHECK(a.ensemble.log_theta == b.ensemble.log_theta);
  CHECK(a.ensemble.log_likelihoods == b.ensemble.log_likelihoods);
  REQUIRE(a.stages.size() == b.stages.size());
  for (std::size_t i = 0; i < a.stages.size(); ++i)
    CHECK(a.stages[i].gamma == b.stages[i].gamma);

  config.seed = 2025;
  const SmcResult c = smc_sample(model, data, prior, config);
  CHECK(a.ensemble.log_theta != c.ensemble.log_theta);
}

TEST_CASE("zero-information likelihood returns the prior") {
  // The observable ignores the parameters and matches the data exactly, and
  // sigma is pinned, so the likelihood is one constant: posterior == prior.
  ConstantModel model;
  Dataset data = scalar_dataset({5.0, 5.0, 5.0}, Homoscedastic{1.0});
  PriorSpec prior(3, {uniform(0, 1.0, 3.0), log_normal(1, std::log(2.0), 0.09),
                      pinned(2, 1.0)});
  SmcConfig config;
  config.particles = 2000;
  config.seed = 303;
  const SmcResult result = smc_sample(model, data, prior, config);

  const Eigen::MatrixXd thetas = result.ensemble.thetas();
  const double a_mean = thetas.col(0).mean();
  const double a_sd = std::sqrt(
      (thetas.col(0).array() - a_mean).square().sum() / (thetas.rows() - 1));
  // U(1,3): mean 2, sd 2/sqrt(12).
  const double u_sd = 2.0 / std::sqrt(12.0);
  CHECK(std::abs(a_mean - 2.0) < 3.0 * u_sd / std::sqrt(2000.0));
  CHECK(std::abs(a_sd - u_sd) < 3.0 * u_sd / std::sqrt(2.0 * 2000.0));
  CHECK(thetas.col(0).minCoeff() >= 1.0);
  CHECK(thetas.col(0).maxCoeff() <= 3.0);

  const Eigen::VectorXd zb = result.ensemble.log_theta.col(1);
  const double b_mean = zb.mean();
  const double b_sd =
      std::sqrt((zb.array() - b_mean).square().sum() / (zb.size() - 1));
  CHECK(std::abs(b_mean - std::log(2.0)) < 3.0 * 0.3 / std::sqrt(2000.0));
  CHECK(std::abs(b_sd - 0.3) < 3.0 * 0.3 / std::sqrt(2.0 * 2000.0));
}

TEST_CASE("linear-Gaussian posterior covariance matches the closed form") {
  LogLinearModel model;
  const double xs[] = {-1.0, -0.5, 0.0, 0.5, 1.0,
                       -1.0, -0.5, 0.0, 0.5, 1.0};
  const double ys[] = {0.85, 0.0,  0.45, 0.17, 0.0,
                       0.33, 0.40, -0.05, -0.03, -0.2};
  const double sigma = 0.3;
  std::vector<DataRecord> records;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x(1);
    x[0] = xs[i];
    records.push_back({x, 0, ys[i]});
  }
  Dataset data(std::move(records), Homoscedastic{sigma});

  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd cov0(2, 2);
  cov0 << 0.5, 0.2, 0.2, 0.4;
  PriorSpec prior(3, {LogNormalComponent{{0, 1}, mu0, cov0}, pinned(2, sigma)});

  // Conjugate posterior of Bayesian linear regression over (ln a, ln b).
  Eigen::MatrixXd X(10, 2);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = xs[i];
    y[i] = ys[i];
  }
  const Eigen::MatrixXd prec =
      cov0.inverse() + X.transpose() * X / (sigma * sigma);
  const Eigen::MatrixXd cov_post = prec.inverse();
  const Eigen::VectorXd mu_post =
      cov_post * (X.transpose() * y / (sigma * sigma));

  SmcConfig config;
  config.particles = 4000;
  config.seed = 909;
  const SmcResult result = smc_sample(model, data, prior, config);
  const Eigen::MatrixXd z = result.ensemble.log_theta.leftCols(2);
  const Eigen::VectorXd mean = z.colwise().mean().transpose();
  const Eigen::MatrixXd centered = z.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov_hat =
      centered.transpose() * centered / (z.rows() - 1);

  const double M = 4000.0;
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(mean[i] - mu_post[i]) <
          3.0 * std::sqrt(cov_post(i, i) / M));
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt((cov_post(i, i) * cov_post(j, j) +
                                   cov_post(i, j) * cov_post(i, j)) /
                                  (M - 1.0));
      CHECK(std::abs(cov_hat(i, j) - cov_post(i, j)) < 3.0 * se);
    }
  }
}

TEST_CASE("saturated-substrate data leaves K_M at its prior spread") {
  MichaelisMentenModel model;
  ObservationGrid grid;
  for (double S : {1500.0, 2000.0, 2500.0, 3000.0, 3500.0}) {
    Eigen::VectorXd x(1);
    x[0] = S;
    grid.push_back({x, 0});
  }
  ParameterVector theta_true(3);
  theta_true << 100.0, 5.0, 146.7;
  Dataset data = synth_heteroscedastic(model, theta_true, grid, 0.25, 100);

  PriorSpec prior(4, {uniform(0, 10.0, 1000.0), uniform(1, 0.5, 50.0),
                      uniform(2, 10.0, 500.0), uniform(3, 0.01, 1.0)});
  SmcConfig config;
  config.particles = 10000;
  config.seed = 1201;
  const SmcResult result = smc_sample(model, data, prior, config);

  const Eigen::MatrixXd thetas = result.ensemble.thetas();
  const Eigen::VectorXd km = thetas.col(2);
  const double mean = km.mean();
  const double sd =
      std::sqrt((km.array() - mean).square().sum() / (km.size() - 1));
  const double prior_sd = 490.0 / std::sqrt(12.0);
  CHECK(sd > 0.8 * prior_sd);
}

TEST_CASE("incompatible data raise a numeric error") {
  // Relative noise requires positive predictions; this model never provides
  // one, so every particle fails and the sampler cannot start.
  ZeroModel model;
  Dataset data = scalar_dataset({1.0, 2.0}, Heteroscedastic{0.25});
  PriorSpec prior(2, {uniform(0, 1.0, 3.0), uniform(1, 0.01, 1.0)});
  SmcConfig config;
  config.particles = 50;
  config.seed = 5;
  CHECK_THROWS_AS(smc_sample(model, data, prior, config), NumericError);
}

TEST_CASE("configuration and prior dimension validation") {
  ConstantModel model;
  Dataset data = scalar_dataset({5.0}, Homoscedastic{1.0});
  PriorSpec prior(3, {uniform(0, 1.0, 3.0), uniform(1, 1.0, 3.0),
                      pinned(2, 1.0)});

  SmcConfig config;
  config.particles = 1;
  CHECK_THROWS_AS(smc_sample(model, data, prior, config), DomainError);

  config = SmcConfig{};
  config.ess_threshold = 1.0;
  CHECK_THROWS_AS(smc_sample(model, data, prior, config), DomainError);

  config = SmcConfig{};
  config.move_completion = 0.0;
  CHECK_THROWS_AS(smc_sample(model, data, prior, config), DomainError);

  config = SmcConfig{};
  config.proposal_scale = 0.0;
  CHECK_THROWS_AS(smc_sample(model, data, prior, config), DomainError);

  PriorSpec wrong_dim(2, {uniform(0, 1.0, 3.0), uniform(1, 1.0, 3.0)});
  config = SmcConfig{};
  config.particles = 50;
  CHECK_THROWS_AS(smc_sample(model, data, wrong_dim, config), DomainError);
}
