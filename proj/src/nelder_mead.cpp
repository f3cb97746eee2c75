#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "sloppykit/optimize.hpp"

namespace sloppykit {

namespace {

constexpr double kAlpha = 1.0;  // reflection
constexpr double kGamma = 2.0;  // expansion
constexpr double kRho = 0.5;    // contraction
constexpr double kSigma = 0.5;  // shrink

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
    const Eigen::VectorXd& upper, const NelderMeadOptions& options) {
  const auto n = x0.size();
  if (n == 0) throw DomainError("nelder_mead: empty start point");
  if (lower.size() != n || upper.size() != n)
    throw DomainError("nelder_mead: bound dimensions do not match");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(lower(i) < upper(i)))
      throw DomainError("nelder_mead: lower bound must be below upper bound");

  int evals = 0;
  bool budget_left = true;
  auto eval = [&](const Eigen::VectorXd& x) -> double {
    if (evals >= options.max_evaluations) {
      budget_left = false;
      return std::numeric_limits<double>::infinity();
    }
    ++evals;
    try {
      const double v = f(x);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (...) {
      return std::numeric_limits<double>::infinity();
    }
  };
  auto clamp = [&](Eigen::VectorXd x) {
    for (Eigen::Index i = 0; i < n; ++i)
      x(i) = std::min(std::max(x(i), lower(i)), upper(i));
    return x;
  };

  Eigen::VectorXd best_x = clamp(x0);
  double best_f = eval(best_x);

  const int rounds = std::max(1, options.restarts + 1);
  bool converged = false;
  for (int round = 0; round < rounds && budget_left; ++round) {
    const double step = options.initial_step / std::pow(2.0, round);
    std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(n) + 1);
    std::vector<double> fs(static_cast<std::size_t>(n) + 1);
    xs[0] = best_x;
    fs[0] = best_f;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd v = best_x;
      v(i) += step;
      v = clamp(v);
      if (v == best_x) {
        v(i) -= 2.0 * step;
        v = clamp(v);
      }
      xs[static_cast<std::size_t>(i) + 1] = v;
      fs[static_cast<std::size_t>(i) + 1] = eval(v);
    }

    std::vector<std::size_t> order(xs.size());
    converged = false;
    while (budget_left) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
      const std::size_t ib = order.front(), iw = order.back();
      const std::size_t is = order[order.size() - 2];  // second worst

      double edge = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i)
        edge = std::max(edge, (xs[i] - xs[ib]).cwiseAbs().maxCoeff());
      const double spread = fs[iw] - fs[ib];
      if ((std::isfinite(spread) && spread < options.f_tol) ||
          edge < options.x_tol) {
        converged = true;
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i < xs.size(); ++i)
        if (i != iw) centroid += xs[i];
      centroid /= static_cast<double>(n);

      const Eigen::VectorXd xr = clamp(centroid + kAlpha * (centroid - xs[iw]));
      const double fr = eval(xr);
      if (fr < fs[ib]) {
        const Eigen::VectorXd xe = clamp(centroid + kGamma * (xr - centroid));
        const double fe = eval(xe);
        if (fe < fr) {
          xs[iw] = xe;
          fs[iw] = fe;
        } else {
          xs[iw] = xr;
          fs[iw] = fr;
        }
      } else if (fr < fs[is]) {
        xs[iw] = xr;
        fs[iw] = fr;
      } else {
        Eigen::VectorXd xc;
        if (fr < fs[iw]) {
          xc = clamp(centroid + kRho * (xr - centroid));
        } else {
          xc = clamp(centroid - kRho * (centroid - xs[iw]));
        }
        const double fc = eval(xc);
        if (fc < std::min(fr, fs[iw])) {
          xs[iw] = xc;
          fs[iw] = fc;
        } else {
          for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i == ib) continue;
            xs[i] = clamp(xs[ib] + kSigma * (xs[i] - xs[ib]));
            fs[i] = eval(xs[i]);
          }
        }
      }
    }

    for (std::size_t i = 0; i < xs.size(); ++i)
      if (fs[i] < best_f) {
        best_f = fs[i];
        best_x = xs[i];
      }
  }

  NelderMeadResult out;
  out.x = best_x;
  out.value = best_f;
  out.evaluations = evals;
  out.converged = converged;
  return out;
}

}  // namespace sloppykit
