#include "sloppykit/finite_difference.hpp"

#include <cmath>

#include "sloppykit/params.hpp"

namespace sloppykit {

namespace {

void check_inputs(const Eigen::VectorXd& theta0, double delta,
                  const char* where) {
  if (theta0.size() == 0)
    throw DomainError(std::string(where) + ": empty parameter vector");
  if (!(delta >= 1e-4 && delta <= 1e-2))
    throw DomainError(std::string(where) +
                      ": step must lie in [1e-4, 1e-2], got " +
                      std::to_string(delta));
  for (Eigen::Index i = 0; i < theta0.size(); ++i)
    if (!(theta0(i) > 0.0) || !std::isfinite(theta0(i)))
      throw DomainError(std::string(where) +
                        ": parameters must be positive and finite");
}

double require_finite(double v, const char* where) {
  if (!std::isfinite(v))
    throw NumericError(std::string(where) +
                       ": function value is not finite near the expansion "
                       "point");
  return v;
}

}  // namespace

Eigen::MatrixXd fd_log_hessian(const LogSpaceScalarFn& f,
                               const Eigen::VectorXd& theta0, double delta) {
  check_inputs(theta0, delta, "fd_log_hessian");
  const Eigen::Index d = theta0.size();
  const Eigen::VectorXd z0 = theta0.array().log().matrix();
  auto eval = [&](const Eigen::VectorXd& z) {
    return require_finite(f(from_log_space(z)), "fd_log_hessian");
  };

  const double f0 = eval(z0);
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd fplus(d), fminus(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd z = z0;
    z(i) = z0(i) + delta;
    fplus(i) = eval(z);
    z(i) = z0(i) - delta;
    fminus(i) = eval(z);
    h(i, i) = (fplus(i) - 2.0 * f0 + fminus(i)) / (delta * delta);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Eigen::VectorXd z = z0;
      z(i) += delta;
      z(j) += delta;
      const double fpp = eval(z);
      z(j) = z0(j) - delta;
      const double fpm = eval(z);
      z(i) = z0(i) - delta;
      z(j) = z0(j) + delta;
      const double fmp = eval(z);
      z(j) = z0(j) - delta;
      const double fmm = eval(z);
      h(i, j) = h(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * delta * delta);
    }
  }
  return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd fd_log_jacobian(const LogSpaceVectorFn& r,
                                const Eigen::VectorXd& theta0, double delta) {
  check_inputs(theta0, delta, "fd_log_jacobian");
  const Eigen::Index d = theta0.size();
  const Eigen::VectorXd z0 = theta0.array().log().matrix();

  Eigen::MatrixXd jac;
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd z = z0;
    z(i) = z0(i) + delta;
    const Eigen::VectorXd rp = r(from_log_space(z));
    z(i) = z0(i) - delta;
    const Eigen::VectorXd rm = r(from_log_space(z));
    if (rp.size() != rm.size())
      throw NumericError("fd_log_jacobian: inconsistent residual length");
    if (jac.size() == 0) jac.resize(rp.size(), d);
    if (rp.size() != jac.rows())
      throw NumericError("fd_log_jacobian: inconsistent residual length");
    for (Eigen::Index k = 0; k < rp.size(); ++k) {
      const double v = (rp(k) - rm(k)) / (2.0 * delta);
      if (!std::isfinite(v))
        throw NumericError(
            "fd_log_jacobian: residual derivative is not finite");
      jac(k, i) = v;
    }
  }
  return jac;
}

}  // namespace sloppykit
