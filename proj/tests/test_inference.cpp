#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "sloppykit/errors.hpp"
#include "sloppykit/likelihood.hpp"
#include "sloppykit/models/michaelis_menten.hpp"
#include "sloppykit/optimize.hpp"
#include "sloppykit/prior.hpp"
#include "sloppykit/synth.hpp"

using namespace sloppykit;

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;

ParameterVector vec(std::initializer_list<double> values) {
  ParameterVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

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

ObservationGrid mm_grid(std::initializer_list<double> S) {
  ObservationGrid g;
  for (double s : S) {
    Eigen::VectorXd x(1);
    x[0] = s;
    g.push_back({x, 0});
  }
  return g;
}

const MichaelisMentenModel kModel;

}  // namespace

TEST_CASE("uniform prior density inside and outside the support") {
  PriorSpec prior(1, {uniform(0, 1.0, 3.0)});
  CHECK(log_prior(prior, vec({2.0})) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(log_prior(prior, vec({4.0})) ==
        -std::numeric_limits<double>::infinity());
  CHECK(log_prior(prior, vec({0.5})) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("scalar log-normal density at the median") {
  PriorSpec prior(1, {log_normal(0, 0.0, 1.0)});
  CHECK(log_prior(prior, vec({1.0})) ==
        doctest::Approx(-0.5 * kLogTwoPi).epsilon(1e-10));
  // One log-sd away picks up the ln-Jacobian plus the Gaussian exponent.
  CHECK(log_prior(prior, vec({std::exp(1.0)})) ==
        doctest::Approx(-0.5 * kLogTwoPi - 1.0 - 0.5).epsilon(1e-10));
}

TEST_CASE("prior coverage must be exact") {
  CHECK_THROWS_AS(PriorSpec(2, {uniform(0, 1.0, 3.0)}), DomainError);
  CHECK_THROWS_AS(
      PriorSpec(2, {uniform(0, 1.0, 3.0), uniform(0, 1.0, 3.0)}), DomainError);
  CHECK_THROWS_AS(PriorSpec(1, {uniform(0, 3.0, 1.0)}), DomainError);
  Eigen::MatrixXd bad(1, 1);
  bad(0, 0) = -1.0;
  Eigen::VectorXd mu(1);
  mu[0] = 0.0;
  CHECK_THROWS_AS(PriorSpec(1, {LogNormalComponent{{0}, mu, bad}}),
                  DomainError);
}

TEST_CASE("prior_sample respects supports and moments") {
  PriorSpec prior(2, {uniform(0, 1.0, 3.0), log_normal(1, 0.5, 0.04)});
  Eigen::MatrixXd draws = prior_sample(prior, 100000, 77);
  REQUIRE(draws.rows() == 100000);
  REQUIRE(draws.cols() == 2);
  double mean0 = 0.0, mean_log1 = 0.0;
  for (int i = 0; i < draws.rows(); ++i) {
    CHECK(draws(i, 0) >= 1.0);
    CHECK(draws(i, 0) <= 3.0);
    mean0 += draws(i, 0);
    mean_log1 += std::log(draws(i, 1));
  }
  mean0 /= static_cast<double>(draws.rows());
  mean_log1 /= static_cast<double>(draws.rows());
  CHECK(std::abs(mean0 - 2.0) < 0.01);
  CHECK(std::abs(mean_log1 - 0.5) < 0.005);
}

TEST_CASE("nearly degenerate log-normal collapses to exp(mu)") {
  PriorSpec prior(1, {log_normal(0, 1.0, 1e-20)});
  Eigen::MatrixXd draws = prior_sample(prior, 100, 5);
  for (int i = 0; i < draws.rows(); ++i)
    CHECK(draws(i, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
}

TEST_CASE("correlated log-normal block reproduces its correlation") {
  Eigen::VectorXd mu(2);
  mu << 0.0, 0.0;
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.8, 0.8, 1.0;
  PriorSpec prior(2, {LogNormalComponent{{0, 1}, mu, cov}});
  Eigen::MatrixXd draws = prior_sample(prior, 100000, 13);
  Eigen::MatrixXd z = draws.array().log().matrix();
  Eigen::RowVectorXd m = z.colwise().mean();
  Eigen::MatrixXd centered = z.rowwise() - m;
  Eigen::MatrixXd cov_hat =
      centered.transpose() * centered / (z.rows() - 1.0);
  CHECK(std::abs(cov_hat(0, 1) / std::sqrt(cov_hat(0, 0) * cov_hat(1, 1)) -
                 0.8) < 0.02);
}

TEST_CASE("prior Cholesky factors") {
  PriorSpec id2(2, {log_normal(0, 0.0, 1.0), log_normal(1, 0.0, 1.0)});
  CHECK(prior_cholesky(id2).isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));

  PriorSpec diag(2, {log_normal(0, 0.0, 4.0), log_normal(1, 0.0, 9.0)});
  Eigen::MatrixXd L = prior_cholesky(diag);
  CHECK(L(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(L(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(L(0, 1) == 0.0);
  CHECK(L(1, 0) == 0.0);

  Eigen::VectorXd mu(2);
  mu << 0.0, 0.0;
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 1.0, 1.0, 2.0;
  PriorSpec corr(2, {LogNormalComponent{{0, 1}, mu, cov}});
  L = prior_cholesky(corr);
  CHECK(L(0, 0) == doctest::Approx(1.41421).epsilon(1e-5));
  CHECK(L(1, 0) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(L(1, 1) == doctest::Approx(1.22474).epsilon(1e-5));
  CHECK((L * L.transpose()).isApprox(cov, 1e-12));
}

TEST_CASE("log-uniform moments match the closed form at (1, e)") {
  const double e = std::exp(1.0);
  // E ln U = 1/(e-1), E ln^2 U = (e-2)/(e-1) for U ~ Uniform(1, e).
  const double mean = 1.0 / (e - 1.0);
  const double second = (e - 2.0) / (e - 1.0);
  CHECK(log_uniform_mean(1.0, e) == doctest::Approx(mean).epsilon(1e-10));
  CHECK(log_uniform_variance(1.0, e) ==
        doctest::Approx(second - mean * mean).epsilon(1e-10));
  // The surrogate appears on the diagonal of the log-space covariance.
  PriorSpec mixed(2, {uniform(0, 1.0, e), log_normal(1, 0.0, 0.25)});
  Eigen::MatrixXd omega = mixed.log_space_covariance();
  CHECK(omega(0, 0) ==
        doctest::Approx(second - mean * mean).epsilon(1e-10));
  CHECK(omega(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(omega(0, 1) == 0.0);
}

TEST_CASE("log-uniform moments match Monte Carlo on a generic interval") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(10.0, 500.0);
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = std::log(u(gen));
    s1 += z;
    s2 += z * z;
  }
  const double mc_mean = s1 / n;
  const double mc_var = s2 / n - mc_mean * mc_mean;
  CHECK(std::abs(log_uniform_mean(10.0, 500.0) - mc_mean) < 0.01);
  CHECK(std::abs(log_uniform_variance(10.0, 500.0) - mc_var) < 0.01);
}

TEST_CASE("single-record likelihood values") {
  // One record with y_obs equal to the prediction, sigma = 1.
  ObservationGrid g = mm_grid({100.0});
  const double y = kModel.predict(g, kModel.spec().reference())[0];
  Dataset perfect({{g[0].x, 0, y}}, Homoscedastic{1.0});
  ParameterVector theta_full = vec({100.0, 5.0, 146.7, 1.0});
  CHECK(log_likelihood(kModel, perfect, theta_full) ==
        doctest::Approx(-0.5 * kLogTwoPi).epsilon(1e-10));

  Dataset off({{g[0].x, 0, y + 1.0}}, Homoscedastic{1.0});
  CHECK(log_likelihood(kModel, off, theta_full) ==
        doctest::Approx(-0.5 * kLogTwoPi - 0.5).epsilon(1e-10));
}

TEST_CASE("heteroscedastic likelihood matches an independent evaluation") {
  ObservationGrid g = mm_grid({1500, 2000, 2500, 3000, 3500});
  ParameterVector theta_r = kModel.spec().reference();
  Dataset data = synth_heteroscedastic(kModel, theta_r, g, 0.25, 100);
  ParameterVector theta_full = vec({100.0, 5.0, 146.7, 0.25});

  auto y = kModel.predict(g, theta_r);
  double expected = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const double sd = 0.25 * y[k];
    const double r = (data.records()[k].y_obs - y[k]) / sd;
    expected += -0.5 * kLogTwoPi - std::log(sd) - 0.5 * r * r;
  }
  CHECK(log_likelihood(kModel, data, theta_full) ==
        doctest::Approx(expected).epsilon(1e-10));

  // The epsilon-dependent normalization must move with theta.
  ParameterVector wider = theta_full;
  wider[3] = 0.5;
  double expected_wide = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const double sd = 0.5 * y[k];
    const double r = (data.records()[k].y_obs - y[k]) / sd;
    expected_wide += -0.5 * kLogTwoPi - std::log(sd) - 0.5 * r * r;
  }
  CHECK(log_likelihood(kModel, data, wider) ==
        doctest::Approx(expected_wide).epsilon(1e-10));
}

TEST_CASE("likelihood is invariant under record reordering") {
  ObservationGrid g = mm_grid({1500, 2000, 2500, 3000, 3500});
  ParameterVector theta_r = kModel.spec().reference();
  Dataset data = synth_heteroscedastic(kModel, theta_r, g, 0.25, 100);
  std::vector<DataRecord> reversed(data.records().rbegin(),
                                   data.records().rend());
  Dataset flipped(reversed, data.noise());
  ParameterVector theta_full = vec({100.0, 5.0, 146.7, 0.25});
  CHECK(log_likelihood(kModel, data, theta_full) ==
        doctest::Approx(log_likelihood(kModel, flipped, theta_full))
            .epsilon(1e-14));
}

TEST_CASE("nonpositive prediction under relative noise is an error") {
  ObservationGrid g = mm_grid({0.0});
  Dataset data({{g[0].x, 0, 0.0}}, Heteroscedastic{0.25});
  CHECK_THROWS_AS(
      log_likelihood(kModel, data, vec({100.0, 5.0, 146.7, 0.25})),
      LikelihoodError);
}

TEST_CASE("cost function is the exact negation of the log likelihood") {
  ObservationGrid g = mm_grid({1500, 3500});
  ParameterVector theta_r = kModel.spec().reference();
  Dataset data = synth_heteroscedastic(kModel, theta_r, g, 0.25, 4);
  for (double scale : {0.5, 1.0, 1.7}) {
    ParameterVector theta = vec(
        {100.0 * scale, 5.0, 146.7 / scale, 0.25});
    CHECK(cost_function(kModel, data, theta) ==
          -log_likelihood(kModel, data, theta));
  }
  // Inflating one residual increases the cost.
  const double y0 = kModel.predict(g, theta_r)[0];
  Dataset base({{g[0].x, 0, y0 + 5.0}}, Homoscedastic{1.0});
  Dataset worse({{g[0].x, 0, y0 + 10.0}}, Homoscedastic{1.0});
  ParameterVector theta_full = vec({100.0, 5.0, 146.7, 1.0});
  CHECK(cost_function(kModel, worse, theta_full) >
        cost_function(kModel, base, theta_full));
}

TEST_CASE("standardized residuals") {
  ObservationGrid g = mm_grid({1500, 3500});
  ParameterVector theta_r = kModel.spec().reference();
  auto y = kModel.predict(g, theta_r);
  Dataset data({{g[0].x, 0, y[0] * 1.1}, {g[1].x, 0, y[1] * 0.9}},
               Heteroscedastic{0.25});
  Eigen::VectorXd r = residuals(kModel, data, vec({100.0, 5.0, 146.7, 0.25}));
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(0.1 / 0.25).epsilon(1e-10));
  CHECK(r[1] == doctest::Approx(-0.1 / 0.25).epsilon(1e-10));
}

TEST_CASE("nelder_mead minimizes a quadratic with a known minimum") {
  auto f = [](const Eigen::VectorXd& x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + 10.0 * (x[1] - 2.0) * (x[1] - 2.0);
  };
  Eigen::VectorXd x0 = vec({3.0, 4.0});
  Eigen::VectorXd lo = vec({-5.0, -5.0});
  Eigen::VectorXd hi = vec({5.0, 5.0});
  NelderMeadResult r = nelder_mead(f, x0, lo, hi);
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 1.0) < 1e-4);
  CHECK(std::abs(r.x[1] - 2.0) < 2e-4);
  CHECK(r.value <= f(x0));

  // Positive affine rescaling of the objective leaves the minimizer alone.
  auto g = [&](const Eigen::VectorXd& x) { return 3.0 * f(x) + 7.0; };
  NelderMeadResult r2 = nelder_mead(g, x0, lo, hi);
  CHECK(std::abs(r2.x[0] - r.x[0]) < 1e-3);
  CHECK(std::abs(r2.x[1] - r.x[1]) < 1e-3);
}

TEST_CASE("nelder_mead respects box constraints") {
  auto f = [](const Eigen::VectorXd& x) { return x[0]; };
  NelderMeadResult r =
      nelder_mead(f, vec({0.5}), vec({-1.0}), vec({1.0}));
  CHECK(r.x[0] >= -1.0 - 1e-12);
  CHECK(r.x[0] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("mle_fit recovers the saturating product on dataset A") {
  ObservationGrid g = mm_grid({1500, 2000, 2500, 3000, 3500});
  ParameterVector theta_r = kModel.spec().reference();
  Dataset data = synth_heteroscedastic(kModel, theta_r, g, 0.25, 100);
  ParameterVector init = vec({100.0, 5.0, 70.0, 0.3});
  ParameterVector lo = vec({10.0, 0.5, 10.0, 0.01});
  ParameterVector hi = vec({1000.0, 50.0, 500.0, 1.0});
  MleResult fit = mle_fit(kModel, data, init, lo, hi);
  CHECK(fit.converged);
  CHECK(fit.cost <= cost_function(kModel, data, init));
  // Beyond saturation only the plateau height is identified; K_M trades off
  // against the bare product, so compare the fitted curve where the data sit.
  const double plateau = mm_rate(2500.0, fit.theta[0], fit.theta[1],
                                 fit.theta[2]);
  CHECK(std::abs(plateau - mm_rate(2500.0, 100.0, 5.0, 146.7)) <
        0.1 * mm_rate(2500.0, 100.0, 5.0, 146.7));
  // With K_M pinned near its true value the product lands on v_max = 500.
  MleResult pinned = mle_fit(kModel, data, vec({100.0, 5.0, 146.7, 0.3}),
                             vec({10.0, 0.5, 140.0, 0.01}),
                             vec({1000.0, 50.0, 155.0, 1.0}));
  const double v_max = pinned.theta[0] * pinned.theta[1];
  CHECK(v_max > 450.0);
  CHECK(v_max < 550.0);
}

TEST_CASE("mle_fit keeps the generator fixed on noiseless data") {
  ObservationGrid g = mm_grid({50, 150, 400, 1500, 3500});
  ParameterVector theta_r = kModel.spec().reference();
  auto y = kModel.predict(g, theta_r);
  std::vector<DataRecord> records;
  for (std::size_t k = 0; k < g.size(); ++k)
    records.push_back({g[k].x, 0, y[k]});
  Dataset data(records, Heteroscedastic{0.25});
  ParameterVector init = vec({100.0, 5.0, 146.7, 0.25});
  ParameterVector lo = vec({10.0, 0.5, 10.0, 0.01});
  ParameterVector hi = vec({1000.0, 50.0, 500.0, 1.0});
  MleResult fit = mle_fit(kModel, data, init, lo, hi);
  // Zero residuals pin every identified combination at the generator: the
  // fitted curve reproduces the data exactly and K_M stays put, while the
  // noise scale slides toward its lower bound (shrinking sd at zero
  // residuals always improves the likelihood) and the k_cat * E_T split
  // may wander along its flat direction.
  CHECK(std::abs(fit.theta[0] * fit.theta[1] - 500.0) < 2.5);
  CHECK(std::abs(fit.theta[2] - 146.7) < 1.5);
  CHECK(fit.theta[3] < 0.05);
  auto y_fit = kModel.predict(g, fit.theta.head(3));
  for (std::size_t k = 0; k < g.size(); ++k)
    CHECK(std::abs(y_fit[k] - y[k]) < 1e-3 * y[k]);
}

TEST_CASE("mle_fit reports non-convergence with its best point") {
  ObservationGrid g = mm_grid({1500, 2000, 2500, 3000, 3500});
  ParameterVector theta_r = kModel.spec().reference();
  Dataset data = synth_heteroscedastic(kModel, theta_r, g, 0.25, 100);
  ParameterVector init = vec({100.0, 5.0, 70.0, 0.3});
  ParameterVector lo = vec({10.0, 0.5, 10.0, 0.01});
  ParameterVector hi = vec({1000.0, 50.0, 500.0, 1.0});
  NelderMeadOptions opt;
  opt.max_evaluations = 20;
  try {
    mle_fit(kModel, data, init, lo, hi, opt);
    CHECK(false);
  } catch (const OptimizationError& e) {
    CHECK_FALSE(e.best_point.converged);
    CHECK(e.best_point.theta.size() == 4);
    CHECK(e.best_point.cost <= cost_function(kModel, data, init));
  }
}
