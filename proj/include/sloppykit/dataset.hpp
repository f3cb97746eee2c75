#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sloppykit/params.hpp"

namespace sloppykit {

// One model evaluation point: independent variables plus a channel index
// selecting which observable the model reports there.
struct ObsPoint {
  Eigen::VectorXd x;
  int channel = 0;
};

using ObservationGrid = std::vector<ObsPoint>;

// Relative noise: sd_k = epsilon * y_model_k.
struct Heteroscedastic {
  double epsilon = 0.0;
};

// Constant noise: sd_k = sigma for every record.
struct Homoscedastic {
  double sigma = 0.0;
};

using NoiseSpec = std::variant<Heteroscedastic, Homoscedastic>;

struct DataRecord {
  Eigen::VectorXd x;
  int channel = 0;
  double y_obs = 0.0;
};

// Where a synthetic dataset came from; absent for datasets read from disk
// without a sidecar.
struct Provenance {
  std::uint64_t seed = 0;
  ParameterVector generating_theta;
};

// Immutable set of observations plus its noise model. Under heteroscedastic
// noise every observed value is nonnegative (draws are truncated at zero).
class Dataset {
 public:
  Dataset(std::vector<DataRecord> records, NoiseSpec noise,
          std::optional<Provenance> provenance = std::nullopt);

  const std::vector<DataRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const NoiseSpec& noise() const { return noise_; }
  const std::optional<Provenance>& provenance() const { return provenance_; }
  bool heteroscedastic() const {
    return std::holds_alternative<Heteroscedastic>(noise_);
  }
  // The evaluation grid induced by the records, in record order.
  ObservationGrid grid() const;

 private:
  std::vector<DataRecord> records_;
  NoiseSpec noise_;
  std::optional<Provenance> provenance_;
};

}  // namespace sloppykit
