#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace sloppykit {

// Values of the estimated parameters in natural (linear) space, ordered as
// in the owning ParameterSpec.
using ParameterVector = Eigen::VectorXd;

struct ParameterEntry {
  std::string name;
  std::string unit;
  double reference = 0.0;
  bool estimated = true;
};

// Ordered list of model parameters. The order of the estimated entries fixes
// the coordinate order of every parameter vector and sensitivity matrix.
class ParameterSpec {
 public:
  ParameterSpec() = default;
  explicit ParameterSpec(std::vector<ParameterEntry> entries);

  const std::vector<ParameterEntry>& entries() const { return entries_; }
  // Number of estimated parameters.
  std::size_t dim() const { return estimated_.size(); }
  const std::vector<std::size_t>& estimated_indices() const {
    return estimated_;
  }
  std::vector<std::string> estimated_names() const;
  // Reference values of the estimated parameters.
  ParameterVector reference() const;
  // Index into the estimated coordinates; throws DomainError if `name` is
  // unknown or not estimated.
  std::size_t index_of(const std::string& name) const;

  nlohmann::json to_json() const;
  static ParameterSpec from_json(const nlohmann::json& j);

 private:
  std::vector<ParameterEntry> entries_;
  std::vector<std::size_t> estimated_;
};

// Elementwise natural log; throws DomainError naming the offending
// coordinate if any component is <= 0. `names` is optional error context.
Eigen::VectorXd to_log_space(const ParameterVector& theta,
                             const std::vector<std::string>& names = {});

// Elementwise exp; inverse of to_log_space.
ParameterVector from_log_space(const Eigen::VectorXd& log_theta);

}  // namespace sloppykit
