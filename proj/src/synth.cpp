#include "sloppykit/synth.hpp"

#include <random>

#include "sloppykit/errors.hpp"
#include "sloppykit/rng.hpp"

namespace sloppykit {

namespace {
constexpr std::uint64_t kSynthTag = 0x73796e7468ULL;  // "synth"
}

Dataset synth_heteroscedastic(const Model& model, const ParameterVector& theta,
                              const ObservationGrid& grid, double epsilon,
                              std::uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw DomainError("synth_heteroscedastic: epsilon must lie in (0, 1)");
  if (grid.empty()) throw DomainError("synth: empty observation grid");
  const auto y = model.predict(grid, theta);
  std::vector<DataRecord> records;
  records.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (y[k] < 0.0)
      throw DomainError(
          "synth_heteroscedastic: model output is negative at record " +
          std::to_string(k));
    const double sd = epsilon * y[k];
    double draw = y[k];
    if (sd > 0.0) {
      auto gen = substream(seed, {kSynthTag, k});
      std::normal_distribution<double> normal(y[k], sd);
      do {
        draw = normal(gen);
      } while (draw < 0.0);
    }
    records.push_back({grid[k].x, grid[k].channel, draw});
  }
  return Dataset(std::move(records), Heteroscedastic{epsilon},
                 Provenance{seed, theta});
}

Dataset synth_homoscedastic(const Model& model, const ParameterVector& theta,
                            const ObservationGrid& grid, double sigma,
                            std::uint64_t seed) {
  if (!(sigma > 0.0))
    throw DomainError("synth_homoscedastic: sigma must be positive");
  if (grid.empty()) throw DomainError("synth: empty observation grid");
  const auto y = model.predict(grid, theta);
  std::vector<DataRecord> records;
  records.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto gen = substream(seed, {kSynthTag, k});
    std::normal_distribution<double> normal(y[k], sigma);
    records.push_back({grid[k].x, grid[k].channel, normal(gen)});
  }
  return Dataset(std::move(records), Homoscedastic{sigma},
                 Provenance{seed, theta});
}

}  // namespace sloppykit
