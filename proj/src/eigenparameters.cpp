#include "sloppykit/eigenparameters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sloppykit/errors.hpp"

namespace sloppykit {

namespace {

constexpr const char* kDot = "\xc2\xb7";  // U+00B7, the product separator

double rounded(double e) { return std::round(e * 10.0) / 10.0; }

std::string term_text(const EigenparameterTerm& term) {
  const double mag = rounded(std::abs(term.exponent));
  if (mag == 1.0) return term.name;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", mag);
  return term.name + "^{" + buf + "}";
}

std::vector<std::string> split(const std::string& text,
                               const std::string& sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t pos; (pos = text.find(sep, start)) != std::string::npos;
       start = pos + sep.size())
    parts.push_back(text.substr(start, pos - start));
  parts.push_back(text.substr(start));
  return parts;
}

EigenparameterTerm parse_term(const std::string& text, bool denominator) {
  if (text.empty())
    throw ParseError("parse_eigenparameter: empty factor");
  std::string name = text;
  double mag = 1.0;
  if (const auto caret = text.find("^{"); caret != std::string::npos) {
    if (text.back() != '}')
      throw ParseError("parse_eigenparameter: unterminated exponent in '" +
                       text + "'");
    name = text.substr(0, caret);
    const std::string body = text.substr(caret + 2, text.size() - caret - 3);
    std::size_t used = 0;
    try {
      mag = std::stod(body, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != body.size() || !(mag > 0.0))
      throw ParseError("parse_eigenparameter: bad exponent '" + body + "'");
  }
  if (name.empty() || name.find_first_of("^{}/") != std::string::npos)
    throw ParseError("parse_eigenparameter: bad parameter name in '" + text +
                     "'");
  return {name, denominator ? -mag : mag};
}

}  // namespace

std::string format_eigenparameter(
    const std::vector<EigenparameterTerm>& terms) {
  if (terms.empty()) return "1";
  std::string num, den;
  for (const auto& term : terms) {
    std::string& side = term.exponent < 0.0 ? den : num;
    if (!side.empty()) side += kDot;
    side += term_text(term);
  }
  if (num.empty())
    throw DomainError(
        "format_eigenparameter: no positive exponent; flip the sign first");
  return den.empty() ? num : num + "/" + den;
}

std::vector<EigenparameterTerm> parse_eigenparameter(const std::string& text) {
  if (text.empty()) throw ParseError("parse_eigenparameter: empty string");
  if (text == "1") return {};
  const auto sides = split(text, "/");
  if (sides.size() > 2)
    throw ParseError("parse_eigenparameter: more than one '/' in '" + text +
                     "'");
  std::vector<EigenparameterTerm> terms;
  for (std::size_t s = 0; s < sides.size(); ++s)
    for (const auto& factor : split(sides[s], kDot))
      terms.push_back(parse_term(factor, s == 1));
  return terms;
}

std::vector<Eigenparameter> extract_eigenparameters(
    const Eigen::MatrixXd& eigenvectors, const Eigen::VectorXd& eigenvalues,
    const std::vector<std::string>& names, double threshold) {
  const Eigen::Index d = eigenvectors.rows();
  if (eigenvectors.cols() != eigenvalues.size())
    throw DomainError(
        "extract_eigenparameters: eigenvector/eigenvalue count mismatch");
  if (static_cast<Eigen::Index>(names.size()) != d)
    throw DomainError("extract_eigenparameters: name count mismatch");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw DomainError(
        "extract_eigenparameters: threshold must lie in (0, 1)");
  if (eigenvalues.size() == 0 || !(eigenvalues(0) > 0.0))
    throw NumericError(
        "extract_eigenparameters: largest eigenvalue must be positive");

  std::vector<Eigenparameter> out;
  out.reserve(eigenvectors.cols());
  for (Eigen::Index n = 0; n < eigenvectors.cols(); ++n) {
    const Eigen::VectorXd v = eigenvectors.col(n);
    if (std::abs(v.norm() - 1.0) > 1e-6)
      throw DomainError("extract_eigenparameters: eigenvectors must be "
                        "unit-norm");
    Eigenparameter ep;
    ep.rank = static_cast<int>(n) + 1;
    ep.lambda = eigenvalues(n);
    ep.lambda_rel = eigenvalues(n) / eigenvalues(0);

    double vmax = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
      if (std::abs(v(j)) >= threshold) vmax = std::max(vmax, std::abs(v(j)));
    if (vmax > 0.0) {
      for (Eigen::Index j = 0; j < d; ++j)
        if (std::abs(v(j)) >= threshold)
          ep.terms.push_back({names[j], v(j) / vmax});
      // Stable sort keeps parameter order among equal magnitudes.
      std::stable_sort(ep.terms.begin(), ep.terms.end(),
                       [](const EigenparameterTerm& a,
                          const EigenparameterTerm& b) {
                         return std::abs(a.exponent) > std::abs(b.exponent);
                       });
      if (ep.terms.front().exponent < 0.0)
        for (auto& term : ep.terms) term.exponent = -term.exponent;
    }
    ep.display = format_eigenparameter(ep.terms);
    out.push_back(std::move(ep));
  }
  return out;
}

SensitivityReport build_report(const SensitivityMatrix& matrix,
                               double threshold) {
  auto [values, vectors] = eigendecompose(matrix);
  if (!(values(0) > 0.0))
    throw NumericError(
        "build_report: largest eigenvalue is not positive; the matrix "
        "carries no sensitivity information");
  SensitivityReport report;
  report.kind = matrix.kind;
  report.context = matrix.context;
  report.eigenvalues = values;
  report.rescaled_eigenvalues = values / values(0);
  report.eigenvectors = vectors;
  report.eigenparameters =
      extract_eigenparameters(vectors, values, matrix.names, threshold);
  return report;
}

nlohmann::json report_to_json(const SensitivityReport& report) {
  nlohmann::json j;
  j["kind"] = matrix_kind_name(report.kind);
  j["context"] = report.context;
  j["eigenvalues"] = std::vector<double>(
      report.eigenvalues.data(),
      report.eigenvalues.data() + report.eigenvalues.size());
  j["rescaled_eigenvalues"] = std::vector<double>(
      report.rescaled_eigenvalues.data(),
      report.rescaled_eigenvalues.data() + report.rescaled_eigenvalues.size());
  auto vectors = nlohmann::json::array();
  for (Eigen::Index n = 0; n < report.eigenvectors.cols(); ++n) {
    auto row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < report.eigenvectors.rows(); ++i)
      row.push_back(report.eigenvectors(i, n));
    vectors.push_back(std::move(row));
  }
  j["eigenvectors"] = std::move(vectors);
  auto eps = nlohmann::json::array();
  for (const auto& ep : report.eigenparameters) {
    auto terms = nlohmann::json::array();
    for (const auto& term : ep.terms)
      terms.push_back({{"name", term.name}, {"exponent", term.exponent}});
    eps.push_back({{"rank", ep.rank},
                   {"lambda", ep.lambda},
                   {"lambda_rel", ep.lambda_rel},
                   {"terms", std::move(terms)},
                   {"display", ep.display}});
  }
  j["eigenparameters"] = std::move(eps);
  return j;
}

SensitivityReport report_from_json(const nlohmann::json& j) {
  try {
    SensitivityReport report;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "H") report.kind = MatrixKind::H;
    else if (kind == "L") report.kind = MatrixKind::L;
    else if (kind == "P") report.kind = MatrixKind::P;
    else if (kind == "G") report.kind = MatrixKind::G;
    else throw ParseError("report_from_json: unknown matrix kind '" + kind + "'");
    report.context = j.at("context").get<std::string>();
    const auto values = j.at("eigenvalues").get<std::vector<double>>();
    const auto rescaled =
        j.at("rescaled_eigenvalues").get<std::vector<double>>();
    report.eigenvalues = Eigen::Map<const Eigen::VectorXd>(
        values.data(), static_cast<Eigen::Index>(values.size()));
    report.rescaled_eigenvalues = Eigen::Map<const Eigen::VectorXd>(
        rescaled.data(), static_cast<Eigen::Index>(rescaled.size()));
    const auto& vectors = j.at("eigenvectors");
    const auto cols = static_cast<Eigen::Index>(vectors.size());
    for (Eigen::Index n = 0; n < cols; ++n) {
      const auto coords = vectors.at(n).get<std::vector<double>>();
      if (n == 0)
        report.eigenvectors.resize(static_cast<Eigen::Index>(coords.size()),
                                   cols);
      if (static_cast<Eigen::Index>(coords.size()) !=
          report.eigenvectors.rows())
        throw ParseError("report_from_json: ragged eigenvector list");
      for (std::size_t i = 0; i < coords.size(); ++i)
        report.eigenvectors(static_cast<Eigen::Index>(i), n) = coords[i];
    }
    for (const auto& ep_json : j.at("eigenparameters")) {
      Eigenparameter ep;
      ep.rank = ep_json.at("rank").get<int>();
      ep.lambda = ep_json.at("lambda").get<double>();
      ep.lambda_rel = ep_json.at("lambda_rel").get<double>();
      for (const auto& term : ep_json.at("terms"))
        ep.terms.push_back({term.at("name").get<std::string>(),
                            term.at("exponent").get<double>()});
      ep.display = ep_json.at("display").get<std::string>();
      report.eigenparameters.push_back(std::move(ep));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report_from_json: malformed report: ") +
                     e.what());
  }
}

}  // namespace sloppykit
