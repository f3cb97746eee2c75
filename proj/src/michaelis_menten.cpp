#include "sloppykit/models/michaelis_menten.hpp"

#include "sloppykit/errors.hpp"

namespace sloppykit {

double mm_rate(double S, double k_cat, double E_T, double K_M) {
  if (!(S >= 0.0)) throw DomainError("mm_rate: S must be >= 0");
  if (!(k_cat > 0.0 && E_T > 0.0 && K_M > 0.0))
    throw DomainError("mm_rate: parameters must be positive");
  return k_cat * E_T * S / (K_M + S);
}

MichaelisMentenModel::MichaelisMentenModel()
    : spec_(ParameterSpec({{"k_cat", "1/min", 100.0, true},
                           {"E_T", "uM", 5.0, true},
                           {"K_M", "uM", 146.7, true}})) {}

std::vector<double> MichaelisMentenModel::predict(
    const ObservationGrid& grid, const ParameterVector& theta) const {
  if (theta.size() != 3)
    throw DomainError("michaelis_menten: expected 3 parameters");
  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& p : grid) {
    if (p.x.size() != 1 || p.channel != 0)
      throw DomainError("michaelis_menten: grid points carry x = (S), channel 0");
    out.push_back(mm_rate(p.x(0), theta(0), theta(1), theta(2)));
  }
  return out;
}

}  // namespace sloppykit
