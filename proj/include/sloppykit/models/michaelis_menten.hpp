#pragma once

#include "sloppykit/model.hpp"

namespace sloppykit {

// Initial reaction velocity of an enzyme at substrate concentration S:
// v = k_cat * E_T * S / (K_M + S). Units: k_cat 1/min, E_T uM, K_M uM,
// S uM, v uM/min. All arguments must be positive except S >= 0.
double mm_rate(double S, double k_cat, double E_T, double K_M);

// Single-channel model; grid points carry x = (S).
class MichaelisMentenModel final : public Model {
 public:
  MichaelisMentenModel();
  std::string name() const override { return "michaelis_menten"; }
  const ParameterSpec& spec() const override { return spec_; }
  std::vector<std::string> channel_names() const override {
    return {"velocity"};
  }
  std::vector<double> predict(const ObservationGrid& grid,
                              const ParameterVector& theta) const override;

 private:
  ParameterSpec spec_;
};

}  // namespace sloppykit
