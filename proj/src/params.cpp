#include "sloppykit/params.hpp"

#include <cmath>
#include <set>

#include "sloppykit/errors.hpp"

namespace sloppykit {

ParameterSpec::ParameterSpec(std::vector<ParameterEntry> entries)
    : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name.empty())
      throw DomainError("parameter entry " + std::to_string(i) +
                        " has an empty name");
    if (!seen.insert(entries_[i].name).second)
      throw DomainError("duplicate parameter name '" + entries_[i].name + "'");
    if (entries_[i].estimated) estimated_.push_back(i);
  }
}

std::vector<std::string> ParameterSpec::estimated_names() const {
  std::vector<std::string> out;
  out.reserve(estimated_.size());
  for (std::size_t i : estimated_) out.push_back(entries_[i].name);
  return out;
}

ParameterVector ParameterSpec::reference() const {
  ParameterVector v(static_cast<Eigen::Index>(estimated_.size()));
  for (std::size_t k = 0; k < estimated_.size(); ++k)
    v(static_cast<Eigen::Index>(k)) = entries_[estimated_[k]].reference;
  return v;
}

std::size_t ParameterSpec::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < estimated_.size(); ++k)
    if (entries_[estimated_[k]].name == name) return k;
  throw DomainError("unknown estimated parameter '" + name + "'");
}

nlohmann::json ParameterSpec::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries_)
    arr.push_back({{"name", e.name},
                   {"unit", e.unit},
                   {"reference", e.reference},
                   {"estimated", e.estimated}});
  return arr;
}

ParameterSpec ParameterSpec::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("parameter spec: expected an array");
  std::vector<ParameterEntry> entries;
  for (const auto& e : j) {
    entries.push_back({e.at("name").get<std::string>(),
                       e.at("unit").get<std::string>(),
                       e.at("reference").get<double>(),
                       e.at("estimated").get<bool>()});
  }
  return ParameterSpec(std::move(entries));
}

Eigen::VectorXd to_log_space(const ParameterVector& theta,
                             const std::vector<std::string>& names) {
  Eigen::VectorXd z(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta(i) > 0.0)) {
      std::string which =
          (static_cast<std::size_t>(i) < names.size())
              ? names[static_cast<std::size_t>(i)]
              : "coordinate " + std::to_string(i);
      throw DomainError("log transform requires positive values; " + which +
                        " = " + std::to_string(theta(i)));
    }
    z(i) = std::log(theta(i));
  }
  return z;
}

ParameterVector from_log_space(const Eigen::VectorXd& log_theta) {
  for (Eigen::Index i = 0; i < log_theta.size(); ++i)
    if (!std::isfinite(log_theta(i)))
      throw DomainError("from_log_space: coordinate " + std::to_string(i) +
                        " is not finite");
  return log_theta.array().exp().matrix();
}

}  // namespace sloppykit
