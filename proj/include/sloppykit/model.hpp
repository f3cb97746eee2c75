#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sloppykit/dataset.hpp"
#include "sloppykit/params.hpp"

namespace sloppykit {

// A deterministic mechanistic model. predict() maps the estimated parameter
// vector to noiseless observables on a grid; repeated calls with identical
// inputs return bit-identical outputs.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual const ParameterSpec& spec() const = 0;
  virtual std::vector<std::string> channel_names() const = 0;
  // One value per grid point, in grid order. Throws DomainError for invalid
  // parameters or grid entries, NumericError if evaluation fails.
  virtual std::vector<double> predict(const ObservationGrid& grid,
                                      const ParameterVector& theta) const = 0;
};

// Factory by model name: "michaelis_menten", "ecosystem", "beeler_reuter".
std::unique_ptr<Model> make_model(const std::string& name);

}  // namespace sloppykit
