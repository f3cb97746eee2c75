#include "sloppykit/models/ecosystem.hpp"

#include <cmath>

#include "sloppykit/errors.hpp"

namespace sloppykit {

EcosystemState ecosystem_step(const EcosystemState& s,
                              const EcosystemParams& p, double dt) {
  if (!(dt > 0.0)) throw DomainError("ecosystem_step: dt must be positive");

  const double r_V =
      -55.12 - 0.0153 * s.V - 0.00056 * s.V * s.V + 2.5 * p.R;
  // Intake saturates with the food available over the step, V + r_V dt.
  const double g_N = p.nu * std::pow(p.w, 0.75) *
                     (1.0 - std::exp(-(s.V + r_V * dt) / p.f));
  const double h_M = g_N;

  const double r_N = -p.a_N + p.c_N * (1.0 - std::exp(-p.d_N * s.V));
  const double g_P =
      (p.k / p.w) * s.N * s.N / (s.N * s.N + p.D_III * p.D_III);

  const double r_M = -p.a_M + p.c_M * (1.0 - std::exp(-p.d_M * s.V));
  const double h_P = (p.k / p.w) * s.M / (s.M + p.D_II);
  const double q_P = h_P * (1.0 - g_P / p.k);

  const double r_P =
      -p.a_P + p.c_P * (1.0 - std::exp(-p.d_P * (s.M + s.P)));

  EcosystemState out;
  out.V = s.V + dt * (r_V - g_N * s.N - h_M * s.M);
  out.N = s.N + dt * (r_N * s.N - g_P * s.P);
  out.M = s.M + dt * (r_M * s.M - q_P * s.P);
  out.P = s.P + dt * (r_P * s.P);

  if (out.V < 0.0) out.V = 0.0;
  if (out.N < 0.08) out.N = 0.08;
  if (out.M < 0.08) out.M = 0.08;
  if (out.P < 0.001) out.P = 0.001;
  return out;
}

std::vector<EcosystemState> ecosystem_simulate(const EcosystemParams& p,
                                               int quarters) {
  if (quarters < 0)
    throw DomainError("ecosystem_simulate: quarters must be >= 0");
  std::vector<EcosystemState> traj;
  traj.reserve(static_cast<std::size_t>(quarters) + 1);
  traj.push_back({p.V0, p.N0, p.M0, p.P0});
  for (int t = 0; t < quarters; ++t)
    traj.push_back(ecosystem_step(traj.back(), p));
  return traj;
}

EcosystemModel::EcosystemModel()
    : spec_(ParameterSpec({{"a_N", "1/quarter", 4.60, true},
                           {"c_N", "1/quarter", 5.50, true},
                           {"d_N", "ha/kg", 0.0045, true},
                           {"a_M", "1/quarter", 4.60, true},
                           {"c_M", "1/quarter", 5.50, true},
                           {"d_M", "ha/kg", 0.0045, true},
                           {"a_P", "1/quarter", 0.56, true},
                           {"c_P", "1/quarter", 0.77, true},
                           {"d_P", "ha", 3.20, true},
                           {"k", "kg/quarter", 100.01, true},
                           {"D_II", "1/ha", 0.99, true},
                           {"D_III", "1/ha", 1.32, true},
                           {"nu", "kg/(kg^(3/4) quarter)", 6.21, true},
                           {"f", "kg/ha", 138.00, true},
                           {"w", "kg", 0.78, true},
                           {"R", "mm", 74.48, true},
                           {"V0", "kg/ha", 300.00, true},
                           {"N0", "1/ha", 0.080, true},
                           {"M0", "1/ha", 0.080, true},
                           {"P0", "1/ha", 0.001, true}})) {}

EcosystemParams EcosystemModel::params_from_vector(
    const ParameterVector& theta) {
  if (theta.size() != 20)
    throw DomainError("ecosystem: expected 20 parameters");
  EcosystemParams p;
  p.a_N = theta(0);
  p.c_N = theta(1);
  p.d_N = theta(2);
  p.a_M = theta(3);
  p.c_M = theta(4);
  p.d_M = theta(5);
  p.a_P = theta(6);
  p.c_P = theta(7);
  p.d_P = theta(8);
  p.k = theta(9);
  p.D_II = theta(10);
  p.D_III = theta(11);
  p.nu = theta(12);
  p.f = theta(13);
  p.w = theta(14);
  p.R = theta(15);
  p.V0 = theta(16);
  p.N0 = theta(17);
  p.M0 = theta(18);
  p.P0 = theta(19);
  return p;
}

std::vector<double> EcosystemModel::predict(const ObservationGrid& grid,
                                            const ParameterVector& theta) const {
  const EcosystemParams p = params_from_vector(theta);
  int horizon = 0;
  std::vector<int> quarter(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& pt = grid[i];
    if (pt.x.size() != 1)
      throw DomainError("ecosystem: grid points carry x = (t)");
    const double t = pt.x(0);
    const int q = static_cast<int>(std::lround(t));
    if (q < 0 || std::abs(t - q) > 1e-9)
      throw DomainError("ecosystem: t must be a whole number of quarters");
    if (pt.channel < 0 || pt.channel > 3)
      throw DomainError("ecosystem: channel must be 0..3");
    quarter[i] = q;
    if (q > horizon) horizon = q;
  }
  const auto traj = ecosystem_simulate(p, horizon);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& s = traj[static_cast<std::size_t>(quarter[i])];
    switch (grid[i].channel) {
      case 0: out[i] = s.V; break;
      case 1: out[i] = s.N; break;
      case 2: out[i] = s.M; break;
      default: out[i] = s.P; break;
    }
  }
  return out;
}

}  // namespace sloppykit
