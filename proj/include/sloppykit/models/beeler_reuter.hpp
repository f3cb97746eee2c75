#pragma once

#include <array>
#include <vector>

#include "sloppykit/model.hpp"

namespace sloppykit {

// Ventricular action potential model: membrane potential V_m (mV),
// intracellular calcium Ca_i (M), and six ion-channel gates in [0, 1].
struct BeelerReuterParams {
  // Estimated.
  double r_Ca = 1e-7;    // M cm^2/nC
  double Ca_SR = 1e-7;   // M
  double k_up = 0.07;    // 1/ms
  double A_K1 = 0.35;    // uA/cm^2
  double A_x1 = 0.8;     // uA/cm^2
  double E_Na = 50.0;    // mV
  double g_Na = 4.0;     // mS/cm^2
  double g_NaC = 0.003;  // mS/cm^2
  double g_s = 0.09;     // mS/cm^2
  // Fixed stimulation protocol and capacitance.
  double A_s = 40.0;     // uA/cm^2
  double t_on = 50.0;    // ms
  double t_dur = 1.0;    // ms
  double C_m = 1.0;      // uF/cm^2
};

// State order: V_m, Ca_i, x1, m, h, j, d, f.
using BeelerReuterState = std::array<double, 8>;

constexpr BeelerReuterState kBeelerReuterInitialState = {
    -83.3, 1.87e-7, 0.1644, 0.01, 0.9814, 0.9673, 0.0033, 0.9884};

struct BeelerReuterCurrents {
  double i_K1 = 0.0;
  double i_x1 = 0.0;
  double i_Na = 0.0;
  double i_s = 0.0;
  double i_stim = 0.0;
};

// Membrane currents (uA/cm^2) at time t (ms). Throws DomainError if
// Ca_i <= 0, where the calcium Nernst potential is undefined.
BeelerReuterCurrents br_currents(const BeelerReuterState& s,
                                 const BeelerReuterParams& p, double t);

// Time derivatives of the full state at time t.
BeelerReuterState br_derivatives(const BeelerReuterState& s,
                                 const BeelerReuterParams& p, double t);

// V_m at the requested times (strictly increasing, starting at 0), from an
// adaptive step-size integrator with an embedded error estimate: exact
// exponential gate relaxation paired with an explicit predictor-corrector
// for V_m and Ca_i. Gates are clipped to [0, 1] after every accepted
// internal step; steps land exactly on the requested times. Throws
// NumericError, naming the failure time, if the step size collapses.
std::vector<double> br_simulate(const BeelerReuterParams& p,
                                const std::vector<double>& times,
                                double rtol = 1e-6, double atol = 1e-8);

// Grid points carry x = (t_ms); the single channel 0 is V_m. The nine
// membrane parameters are estimated; the stimulation protocol is fixed.
class BeelerReuterModel final : public Model {
 public:
  BeelerReuterModel();
  std::string name() const override { return "beeler_reuter"; }
  const ParameterSpec& spec() const override { return spec_; }
  std::vector<std::string> channel_names() const override { return {"V_m"}; }
  std::vector<double> predict(const ObservationGrid& grid,
                              const ParameterVector& theta) const override;

  static BeelerReuterParams params_from_vector(const ParameterVector& theta);

 private:
  ParameterSpec spec_;
};

}  // namespace sloppykit
