#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sloppykit/sensitivity.hpp"

namespace sloppykit {

struct EigenparameterTerm {
  std::string name;
  double exponent;
};

// One eigenvector rendered as a product of bare parameters. Terms are
// sorted by |exponent| descending; after rescaling the largest-magnitude
// exponent is exactly +1. An eigenvector whose loadings all fall below the
// threshold yields empty terms and the display "1".
struct Eigenparameter {
  int rank = 0;
  double lambda = 0.0;
  double lambda_rel = 0.0;
  std::vector<EigenparameterTerm> terms;
  std::string display;
};

struct SensitivityReport {
  MatrixKind kind;
  std::string context;
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd rescaled_eigenvalues;
  Eigen::MatrixXd eigenvectors;
  std::vector<Eigenparameter> eigenparameters;
};

// Thresholds each unit-norm eigenvector (columns), rescales the surviving
// loadings so the extreme exponent is 1, and formats the display string.
std::vector<Eigenparameter> extract_eigenparameters(
    const Eigen::MatrixXd& eigenvectors, const Eigen::VectorXd& eigenvalues,
    const std::vector<std::string>& names, double threshold = 0.2);

// Display grammar: numerator terms joined by "·", a "/" introduces the
// denominator, exponents of magnitude 1 are elided, others appear as
// name^{0.9} with one decimal.
std::string format_eigenparameter(const std::vector<EigenparameterTerm>& terms);
std::vector<EigenparameterTerm> parse_eigenparameter(const std::string& text);

SensitivityReport build_report(const SensitivityMatrix& matrix,
                               double threshold = 0.2);

nlohmann::json report_to_json(const SensitivityReport& report);
SensitivityReport report_from_json(const nlohmann::json& j);

}  // namespace sloppykit
