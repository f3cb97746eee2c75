#include "sloppykit/likelihood.hpp"
#include "sloppykit/optimize.hpp"

namespace sloppykit {

MleResult mle_fit(const Model& model, const Dataset& data,
                  const ParameterVector& init, const ParameterVector& lower,
                  const ParameterVector& upper,
                  const NelderMeadOptions& options) {
  const auto d = static_cast<Eigen::Index>(model.spec().dim()) + 1;
  if (init.size() != d || lower.size() != d || upper.size() != d)
    throw DomainError("mle_fit: init and bounds must cover the model "
                      "parameters plus the noise parameter");
  auto names = model.spec().estimated_names();
  names.push_back(data.heteroscedastic() ? "epsilon" : "sigma");

  const Eigen::VectorXd z0 = to_log_space(init, names);
  const Eigen::VectorXd zlo = to_log_space(lower, names);
  const Eigen::VectorXd zhi = to_log_space(upper, names);

  const auto objective = [&](const Eigen::VectorXd& z) {
    return cost_function(model, data, from_log_space(z));
  };
  const NelderMeadResult r = nelder_mead(objective, z0, zlo, zhi, options);

  MleResult out;
  out.theta = from_log_space(r.x);
  out.cost = r.value;
  out.evaluations = r.evaluations;
  out.converged = r.converged;
  if (!r.converged)
    throw OptimizationError(
        "mle_fit: simplex search did not converge within " +
            std::to_string(options.max_evaluations) + " evaluations",
        out);
  return out;
}

}  // namespace sloppykit
