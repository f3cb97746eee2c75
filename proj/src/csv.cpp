#include "sloppykit/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "sloppykit/errors.hpp"

namespace sloppykit {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos;
       start = pos + 1)
    fields.push_back(line.substr(start, pos - start));
  fields.push_back(line.substr(start));
  return fields;
}

ParseError row_error(const std::string& path, int line,
                     const std::string& what) {
  return ParseError(path + ":" + std::to_string(line) + ": " + what);
}

double parse_field(const std::string& text, const std::string& path,
                   int line) {
  try {
    return parse_double(text);
  } catch (const ParseError& e) {
    throw row_error(path, line, e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  return in;
}

// Reads logical lines, stripping a trailing '\r' so CRLF files parse.
bool next_line(std::ifstream& in, std::string& line, int& lineno) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++lineno;
  return true;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("bad numeric field '" + text + "'");
  return value;
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
  auto out = open_out(path);
  if (dataset.heteroscedastic())
    out << "# noise,heteroscedastic,"
        << format_double(std::get<Heteroscedastic>(dataset.noise()).epsilon)
        << "\n";
  else
    out << "# noise,homoscedastic,"
        << format_double(std::get<Homoscedastic>(dataset.noise()).sigma)
        << "\n";
  if (dataset.provenance()) {
    const auto& prov = *dataset.provenance();
    out << "# seed," << prov.seed << "\n";
    out << "# theta";
    for (Eigen::Index i = 0; i < prov.generating_theta.size(); ++i)
      out << "," << format_double(prov.generating_theta(i));
    out << "\n";
  }
  const auto dim = dataset.records().front().x.size();
  for (Eigen::Index i = 0; i < dim; ++i) out << "x" << (i + 1) << ",";
  out << "channel,y_obs\n";
  for (const auto& rec : dataset.records()) {
    for (Eigen::Index i = 0; i < dim; ++i)
      out << format_double(rec.x(i)) << ",";
    out << rec.channel << "," << format_double(rec.y_obs) << "\n";
  }
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

Dataset read_dataset_csv(const std::string& path) {
  auto in = open_in(path);
  int lineno = 0;
  std::string line;

  std::optional<NoiseSpec> noise;
  std::optional<std::uint64_t> seed;
  std::optional<ParameterVector> theta;
  bool have_header = false;
  Eigen::Index dim = 0;
  std::vector<DataRecord> records;

  while (next_line(in, line, lineno)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto fields = split_fields(line.substr(2));
      if (fields.empty()) continue;
      if (fields[0] == "noise") {
        if (fields.size() != 3)
          throw row_error(path, lineno, "noise line needs kind and value");
        const double value = parse_field(fields[2], path, lineno);
        if (fields[1] == "heteroscedastic")
          noise = Heteroscedastic{value};
        else if (fields[1] == "homoscedastic")
          noise = Homoscedastic{value};
        else
          throw row_error(path, lineno,
                          "unknown noise kind '" + fields[1] + "'");
      } else if (fields[0] == "seed") {
        if (fields.size() != 2)
          throw row_error(path, lineno, "seed line needs one value");
        std::uint64_t s = 0;
        const auto res = std::from_chars(
            fields[1].data(), fields[1].data() + fields[1].size(), s);
        if (res.ec != std::errc() ||
            res.ptr != fields[1].data() + fields[1].size())
          throw row_error(path, lineno, "bad seed '" + fields[1] + "'");
        seed = s;
      } else if (fields[0] == "theta") {
        ParameterVector v(static_cast<Eigen::Index>(fields.size()) - 1);
        for (std::size_t i = 1; i < fields.size(); ++i)
          v(static_cast<Eigen::Index>(i) - 1) =
              parse_field(fields[i], path, lineno);
        theta = v;
      }
      continue;
    }
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 3 || fields[fields.size() - 2] != "channel" ||
          fields.back() != "y_obs")
        throw row_error(path, lineno,
                        "expected header x1..xn,channel,y_obs");
      dim = static_cast<Eigen::Index>(fields.size()) - 2;
      for (Eigen::Index i = 0; i < dim; ++i)
        if (fields[i] != "x" + std::to_string(i + 1))
          throw row_error(path, lineno,
                          "expected header x1..xn,channel,y_obs");
      have_header = true;
      continue;
    }
    if (static_cast<Eigen::Index>(fields.size()) != dim + 2)
      throw row_error(path, lineno,
                      "expected " + std::to_string(dim + 2) + " fields, got " +
                          std::to_string(fields.size()));
    DataRecord rec;
    rec.x.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      rec.x(i) = parse_field(fields[i], path, lineno);
    const auto& ch = fields[dim];
    const auto res =
        std::from_chars(ch.data(), ch.data() + ch.size(), rec.channel);
    if (res.ec != std::errc() || res.ptr != ch.data() + ch.size() ||
        rec.channel < 0)
      throw row_error(path, lineno, "bad channel '" + ch + "'");
    rec.y_obs = parse_field(fields[dim + 1], path, lineno);
    records.push_back(std::move(rec));
  }

  if (!have_header) throw ParseError(path + ": missing header row");
  if (!noise) throw ParseError(path + ": missing '# noise' line");
  if (seed.has_value() != theta.has_value())
    throw ParseError(path + ": provenance needs both seed and theta lines");
  std::optional<Provenance> prov;
  if (seed) prov = Provenance{*seed, *theta};
  return Dataset(std::move(records), *noise, std::move(prov));
}

void write_ensemble_csv(const ParticleEnsemble& ensemble,
                        const std::string& path) {
  const auto rows = ensemble.log_theta.rows();
  const auto cols = ensemble.log_theta.cols();
  if (rows == 0 || static_cast<Eigen::Index>(ensemble.names.size()) != cols ||
      ensemble.log_likelihoods.size() != rows)
    throw DomainError("write_ensemble_csv: inconsistent ensemble");
  auto out = open_out(path);
  out << "# temperature," << format_double(ensemble.temperature) << "\n";
  for (const auto& name : ensemble.names) out << name << ",";
  out << "log_likelihood\n";
  for (Eigen::Index m = 0; m < rows; ++m) {
    for (Eigen::Index j = 0; j < cols; ++j)
      out << format_double(std::exp(ensemble.log_theta(m, j))) << ",";
    out << format_double(ensemble.log_likelihoods(m)) << "\n";
  }
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

ParticleEnsemble read_ensemble_csv(const std::string& path) {
  auto in = open_in(path);
  int lineno = 0;
  std::string line;
  ParticleEnsemble ensemble;
  ensemble.temperature = 1.0;
  bool have_header = false;
  std::vector<std::vector<double>> log_rows;
  std::vector<double> lls;

  while (next_line(in, line, lineno)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto fields = split_fields(line.substr(2));
      if (fields.size() == 2 && fields[0] == "temperature")
        ensemble.temperature = parse_field(fields[1], path, lineno);
      continue;
    }
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 2 || fields.back() != "log_likelihood")
        throw row_error(path, lineno,
                        "expected header <names...>,log_likelihood");
      ensemble.names.assign(fields.begin(), fields.end() - 1);
      have_header = true;
      continue;
    }
    if (fields.size() != ensemble.names.size() + 1)
      throw row_error(path, lineno, "field count mismatch");
    std::vector<double> zrow(ensemble.names.size());
    for (std::size_t j = 0; j < ensemble.names.size(); ++j) {
      const double theta = parse_field(fields[j], path, lineno);
      if (!(theta > 0.0))
        throw row_error(path, lineno, "parameters must be positive");
      zrow[j] = std::log(theta);
    }
    lls.push_back(parse_field(fields.back(), path, lineno));
    log_rows.push_back(std::move(zrow));
  }
  if (!have_header) throw ParseError(path + ": missing header row");
  if (log_rows.empty()) throw ParseError(path + ": no particles");

  const auto rows = static_cast<Eigen::Index>(log_rows.size());
  const auto cols = static_cast<Eigen::Index>(ensemble.names.size());
  ensemble.log_theta.resize(rows, cols);
  ensemble.log_likelihoods.resize(rows);
  for (Eigen::Index m = 0; m < rows; ++m) {
    for (Eigen::Index j = 0; j < cols; ++j)
      ensemble.log_theta(m, j) = log_rows[m][j];
    ensemble.log_likelihoods(m) = lls[m];
  }
  return ensemble;
}

std::string emit_spectrum_table(const SensitivityReport& report) {
  std::ostringstream out;
  out << "rank,lambda,lambda_rel\n";
  for (Eigen::Index n = 0; n < report.eigenvalues.size(); ++n)
    out << (n + 1) << "," << format_double(report.eigenvalues(n)) << ","
        << format_double(report.rescaled_eigenvalues(n)) << "\n";
  return out.str();
}

}  // namespace sloppykit
