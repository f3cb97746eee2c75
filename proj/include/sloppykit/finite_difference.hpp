#pragma once

#include <functional>

#include <Eigen/Dense>

#include "sloppykit/errors.hpp"

namespace sloppykit {

// Scalar field over log parameters, evaluated at linear-space theta.
using LogSpaceScalarFn = std::function<double(const Eigen::VectorXd&)>;
// Vector field (e.g. residuals) over log parameters.
using LogSpaceVectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central-difference Hessian of f with respect to z = ln(theta), evaluated
// at theta_0. The callable receives linear-space theta. Step delta applies
// in log space and must lie in [1e-4, 1e-2]. The result is symmetrized.
Eigen::MatrixXd fd_log_hessian(const LogSpaceScalarFn& f,
                               const Eigen::VectorXd& theta0,
                               double delta = 1e-3);

// Central-difference Jacobian d r / d z at theta_0, one column per log
// parameter.
Eigen::MatrixXd fd_log_jacobian(const LogSpaceVectorFn& r,
                                const Eigen::VectorXd& theta0,
                                double delta = 1e-3);

}  // namespace sloppykit
