#include "itl/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace itl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (t.header.empty()) {
      t.header = split_line(line);
      continue;
    }
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw DataError("CSV is empty (header row required)");
  if (t.rows.empty()) throw DataError("CSV has a header but no data rows");
  return t;
}

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  if (cell.empty()) {
    throw DataError("line " + std::to_string(line) + ": missing value in column '" +
                    column + "'");
  }
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError("line " + std::to_string(line) + ": column '" + column +
                    "' has non-numeric value '" + cell + "'");
  }
  return v;
}

bool is_reserved(const std::string& name) {
  return name == "treatment" || name == "outcome" || name == "propensity";
}

std::map<std::string, std::size_t> column_index(const Table& t) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c].empty()) throw DataError("CSV header has an empty column name");
    if (!idx.emplace(t.header[c], c).second) {
      throw DataError("CSV header repeats column '" + t.header[c] + "'");
    }
  }
  return idx;
}

Matrix covariate_block(const Table& t, const std::vector<std::size_t>& cols) {
  Matrix x(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          parse_number(t.rows[i][cols[k]], t.line_numbers[i], t.header[cols[k]]);
    }
  }
  return x;
}

}  // namespace

TrialCsv parse_trial_csv(std::istream& in, const std::string& label) {
  const Table t = read_table(in);
  const auto idx = column_index(t);
  for (const char* required : {"treatment", "outcome"}) {
    if (!idx.count(required)) {
      throw DataError(std::string("CSV lacks required column '") + required + "'");
    }
  }
  std::vector<std::size_t> cov_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (is_reserved(t.header[c])) continue;
    cov_cols.push_back(c);
    names.push_back(t.header[c]);
  }
  if (cov_cols.empty()) throw DataError("CSV has no covariate columns");

  const auto n = static_cast<Eigen::Index>(t.rows.size());
  const std::size_t tc = idx.at("treatment");
  const std::size_t rc = idx.at("outcome");
  const auto pc = idx.find("propensity");
  std::vector<int> treatments(t.rows.size());
  Vector outcomes(n);
  Vector propensities = Vector::Constant(n, 0.5);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto line = t.line_numbers[i];
    const double tv = parse_number(t.rows[i][tc], line, "treatment");
    if (tv != 1.0 && tv != -1.0) {
      throw DataError("line " + std::to_string(line) +
                      ": treatment must be -1 or +1, got '" + t.rows[i][tc] + "'");
    }
    treatments[i] = tv > 0 ? 1 : -1;
    outcomes[static_cast<Eigen::Index>(i)] = parse_number(t.rows[i][rc], line, "outcome");
    if (pc != idx.end()) {
      propensities[static_cast<Eigen::Index>(i)] =
          parse_number(t.rows[i][pc->second], line, "propensity");
    }
  }
  TrialCsv out{TrialDataset(covariate_block(t, cov_cols), std::move(treatments),
                            std::move(outcomes), std::move(propensities), label),
               std::move(names), pc == idx.end()};
  return out;
}

TrialCsv read_trial_csv(const std::string& path, std::ostream* notices) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    TrialCsv out = parse_trial_csv(in, path);
    if (out.propensity_defaulted && notices) {
      *notices << "note: " << path << " has no propensity column; using 0.5\n";
    }
    return out;
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

CovariateCsv parse_covariate_csv(std::istream& in) {
  const Table t = read_table(in);
  column_index(t);
  std::vector<std::size_t> cols;
  CovariateCsv out;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (is_reserved(t.header[c])) continue;
    cols.push_back(c);
    out.names.push_back(t.header[c]);
  }
  if (cols.empty()) throw DataError("CSV has no covariate columns");
  out.covariates = covariate_block(t, cols);
  if (!out.covariates.allFinite()) throw DataError("CSV contains non-finite covariates");
  return out;
}

CovariateCsv read_covariate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return parse_covariate_csv(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string trial_csv_string(const TrialDataset& data,
                             const std::vector<std::string>& covariate_names) {
  const auto p = data.dim();
  if (!covariate_names.empty() &&
      static_cast<Eigen::Index>(covariate_names.size()) != p) {
    throw DimensionError("covariate name count does not match dataset");
  }
  std::ostringstream out;
  for (Eigen::Index k = 0; k < p; ++k) {
    out << (covariate_names.empty() ? "x" + std::to_string(k + 1)
                                    : covariate_names[static_cast<std::size_t>(k)])
        << ',';
  }
  out << "treatment,outcome,propensity\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index k = 0; k < p; ++k) out << format_double(data.covariates(i, k)) << ',';
    out << data.treatments[static_cast<std::size_t>(i)] << ','
        << format_double(data.outcomes[i]) << ','
        << format_double(data.propensities[i]) << '\n';
  }
  return out.str();
}

}  // namespace itl
