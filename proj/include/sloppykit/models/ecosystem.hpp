#pragma once

#include <vector>

#include "sloppykit/model.hpp"

namespace sloppykit {

// Semi-arid rangeland network: pasture V (kg/ha), rabbits N (1/ha),
// threatened native mammals M (1/ha), foxes P (1/ha), on a quarterly
// time step.
struct EcosystemParams {
  double a_N = 4.60;    // 1/quarter
  double c_N = 5.50;    // 1/quarter
  double d_N = 0.0045;  // ha/kg
  double a_M = 4.60;    // 1/quarter
  double c_M = 5.50;    // 1/quarter
  double d_M = 0.0045;  // ha/kg
  double a_P = 0.56;    // 1/quarter
  double c_P = 0.77;    // 1/quarter
  double d_P = 3.20;    // ha
  double k = 100.01;    // kg/quarter
  double D_II = 0.99;   // 1/ha
  double D_III = 1.32;  // 1/ha
  double nu = 6.21;     // kg/(kg^(3/4) quarter)
  double f = 138.00;    // kg/ha
  double w = 0.78;      // kg
  double R = 74.48;     // mm
  double V0 = 300.00;   // kg/ha
  double N0 = 0.080;    // 1/ha
  double M0 = 0.080;    // 1/ha
  double P0 = 0.001;    // 1/ha
};

struct EcosystemState {
  double V = 0.0;
  double N = 0.0;
  double M = 0.0;
  double P = 0.0;
};

// One forward difference step of length dt (quarters). All rates are
// evaluated at the incoming state, then the state floors are applied:
// V >= 0, N >= 0.08, M >= 0.08, P >= 0.001.
EcosystemState ecosystem_step(const EcosystemState& s,
                              const EcosystemParams& p, double dt = 1.0);

// Trajectory over `quarters` unit steps, including the initial state;
// result has quarters + 1 entries.
std::vector<EcosystemState> ecosystem_simulate(const EcosystemParams& p,
                                               int quarters);

// Grid points carry x = (t) with t a whole number of quarters; channels are
// 0:V, 1:N, 2:M, 3:P. All twenty parameters are estimated.
class EcosystemModel final : public Model {
 public:
  EcosystemModel();
  std::string name() const override { return "ecosystem"; }
  const ParameterSpec& spec() const override { return spec_; }
  std::vector<std::string> channel_names() const override {
    return {"V", "N", "M", "P"};
  }
  std::vector<double> predict(const ObservationGrid& grid,
                              const ParameterVector& theta) const override;

  static EcosystemParams params_from_vector(const ParameterVector& theta);

 private:
  ParameterSpec spec_;
};

}  // namespace sloppykit
