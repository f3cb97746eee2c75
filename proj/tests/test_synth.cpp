#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sloppykit/errors.hpp"
#include "sloppykit/models/michaelis_menten.hpp"
#include "sloppykit/synth.hpp"

using namespace sloppykit;

namespace {

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

ParameterVector mm_theta() { return kModel.spec().reference(); }

}  // namespace

TEST_CASE("heteroscedastic synthesis is deterministic in the seed") {
  auto g = mm_grid({1500, 2000, 2500, 3000, 3500});
  Dataset a = synth_heteroscedastic(kModel, mm_theta(), g, 0.25, 42);
  Dataset b = synth_heteroscedastic(kModel, mm_theta(), g, 0.25, 42);
  Dataset c = synth_heteroscedastic(kModel, mm_theta(), g, 0.25, 43);
  REQUIRE(a.size() == 5);
  int diff = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(a.records()[k].y_obs == b.records()[k].y_obs);
    diff += (a.records()[k].y_obs != c.records()[k].y_obs);
  }
  CHECK(diff == 5);
  REQUIRE(a.provenance().has_value());
  CHECK(a.provenance()->seed == 42);
  CHECK(a.provenance()->generating_theta == mm_theta());
  CHECK(std::get<Heteroscedastic>(a.noise()).epsilon == 0.25);
}

TEST_CASE("heteroscedastic draws stay nonnegative even at high noise") {
  // S = 2 uM gives a small rate, and epsilon = 0.9 makes sign flips of the
  // untruncated normal common, so this exercises the truncation loop.
  auto g = mm_grid({2.0});
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    Dataset d = synth_heteroscedastic(kModel, mm_theta(), g, 0.9, seed);
    CHECK(d.records()[0].y_obs >= 0.0);
  }
}

TEST_CASE("heteroscedastic replicate spread matches epsilon times the signal") {
  auto g = mm_grid({2500.0});
  const double y = mm_rate(2500.0, 100.0, 5.0, 146.7);
  double sum = 0.0, sum2 = 0.0;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    double v = synth_heteroscedastic(kModel, mm_theta(), g, 0.25, seed)
                   .records()[0]
                   .y_obs;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
  CHECK(std::abs(mean - y) < 0.02 * y);
  CHECK(std::abs(sd - 0.25 * y) < 0.05 * 0.25 * y);
}

TEST_CASE("a zero-signal record has zero relative noise") {
  auto g = mm_grid({0.0});
  Dataset d = synth_heteroscedastic(kModel, mm_theta(), g, 0.25, 7);
  CHECK(d.records()[0].y_obs == 0.0);
}

TEST_CASE("heteroscedastic noise vanishes as epsilon approaches zero") {
  auto g = mm_grid({1500, 3500});
  auto y = kModel.predict(g, mm_theta());
  Dataset d = synth_heteroscedastic(kModel, mm_theta(), g, 1e-9, 11);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(std::abs(d.records()[k].y_obs - y[k]) < 1e-6 * y[k]);
}

TEST_CASE("homoscedastic synthesis determinism and moments") {
  auto g = mm_grid({100.0});
  const double y = mm_rate(100.0, 100.0, 5.0, 146.7);
  Dataset a = synth_homoscedastic(kModel, mm_theta(), g, 2.0, 9);
  Dataset b = synth_homoscedastic(kModel, mm_theta(), g, 2.0, 9);
  CHECK(a.records()[0].y_obs == b.records()[0].y_obs);
  CHECK(std::holds_alternative<Homoscedastic>(a.noise()));

  double sum = 0.0, sum2 = 0.0;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    double v = synth_homoscedastic(kModel, mm_theta(), g, 2.0, seed)
                   .records()[0]
                   .y_obs;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
  CHECK(std::abs(mean - y) < 0.1);
  CHECK(std::abs(sd - 2.0) < 0.1);
}

TEST_CASE("homoscedastic noise vanishes as sigma approaches zero") {
  auto g = mm_grid({100.0});
  const double y = mm_rate(100.0, 100.0, 5.0, 146.7);
  Dataset d = synth_homoscedastic(kModel, mm_theta(), g, 1e-12, 3);
  CHECK(std::abs(d.records()[0].y_obs - y) < 1e-9);
}

TEST_CASE("noise draws at distinct grid points are uncorrelated") {
  auto g = mm_grid({1500.0, 3500.0});
  auto y = kModel.predict(g, mm_theta());
  const int n = 4000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int seed = 0; seed < n; ++seed) {
    Dataset d = synth_heteroscedastic(kModel, mm_theta(), g, 0.25, seed);
    const double u = d.records()[0].y_obs - y[0];
    const double v = d.records()[1].y_obs - y[1];
    sx += u;
    sy += v;
    sxx += u * u;
    syy += v * v;
    sxy += u * v;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double vu = sxx / n - (sx / n) * (sx / n);
  const double vv = syy / n - (sy / n) * (sy / n);
  const double corr = cov / std::sqrt(vu * vv);
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("synthesis argument validation") {
  auto g = mm_grid({100.0});
  CHECK_THROWS_AS(synth_heteroscedastic(kModel, mm_theta(), g, 0.0, 1),
                  DomainError);
  CHECK_THROWS_AS(synth_heteroscedastic(kModel, mm_theta(), g, 1.0, 1),
                  DomainError);
  CHECK_THROWS_AS(synth_heteroscedastic(kModel, mm_theta(), {}, 0.25, 1),
                  DomainError);
  CHECK_THROWS_AS(synth_homoscedastic(kModel, mm_theta(), g, 0.0, 1),
                  DomainError);
  CHECK_THROWS_AS(synth_homoscedastic(kModel, mm_theta(), {}, 2.0, 1),
                  DomainError);
}
