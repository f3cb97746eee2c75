#pragma once

#include <functional>

#include <Eigen/Core>

#include "sloppykit/dataset.hpp"
#include "sloppykit/errors.hpp"
#include "sloppykit/model.hpp"

namespace sloppykit {

struct NelderMeadOptions {
  int max_evaluations = 40000;
  double f_tol = 1e-10;       // spread of simplex values
  double x_tol = 1e-8;        // simplex edge length
  double initial_step = 0.25; // first simplex edge, in the search coordinates
  int restarts = 2;           // rebuilds around the incumbent best
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free simplex search with box constraints (candidate vertices
// are clamped into [lower, upper]). Objective evaluations that throw are
// treated as +inf. The returned value never exceeds f(x0).
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
    const Eigen::VectorXd& upper, const NelderMeadOptions& options = {});

struct MleResult {
  ParameterVector theta;  // natural space, trailing noise coordinate
  double cost = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Thrown when the simplex search exhausts its budget; carries the best
// point found so far.
class OptimizationError : public NumericError {
 public:
  OptimizationError(const std::string& what, MleResult best)
      : NumericError(what), best_point(std::move(best)) {}
  MleResult best_point;
};

// Maximum likelihood fit over log parameters within box bounds (natural
// space). `init` and the bounds cover the model parameters plus the
// trailing noise coordinate.
MleResult mle_fit(const Model& model, const Dataset& data,
                  const ParameterVector& init, const ParameterVector& lower,
                  const ParameterVector& upper,
                  const NelderMeadOptions& options = {});

}  // namespace sloppykit
