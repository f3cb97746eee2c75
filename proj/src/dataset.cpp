#include "sloppykit/dataset.hpp"

#include <cmath>

#include "sloppykit/errors.hpp"

namespace sloppykit {

Dataset::Dataset(std::vector<DataRecord> records, NoiseSpec noise,
                 std::optional<Provenance> provenance)
    : records_(std::move(records)),
      noise_(noise),
      provenance_(std::move(provenance)) {
  if (records_.empty()) throw DomainError("dataset has no records");
  const auto xdim = records_.front().x.size();
  for (std::size_t k = 0; k < records_.size(); ++k) {
    const auto& r = records_[k];
    if (r.x.size() != xdim)
      throw DomainError("dataset record " + std::to_string(k) +
                        " has inconsistent x dimension");
    if (r.channel < 0)
      throw DomainError("dataset record " + std::to_string(k) +
                        " has negative channel");
    if (!std::isfinite(r.y_obs))
      throw DomainError("dataset record " + std::to_string(k) +
                        " has non-finite observation");
  }
  if (auto* het = std::get_if<Heteroscedastic>(&noise_)) {
    if (!(het->epsilon > 0.0 && het->epsilon < 1.0))
      throw DomainError("heteroscedastic epsilon must lie in (0, 1)");
    for (std::size_t k = 0; k < records_.size(); ++k)
      if (records_[k].y_obs < 0.0)
        throw DomainError("heteroscedastic dataset record " +
                          std::to_string(k) + " has negative observation");
  } else {
    if (!(std::get<Homoscedastic>(noise_).sigma > 0.0))
      throw DomainError("homoscedastic sigma must be positive");
  }
}

ObservationGrid Dataset::grid() const {
  ObservationGrid g;
  g.reserve(records_.size());
  for (const auto& r : records_) g.push_back({r.x, r.channel});
  return g;
}

}  // namespace sloppykit
