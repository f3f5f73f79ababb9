#include "itl/rule_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace itl {

using nlohmann::json;

namespace {

json to_array(const Vector& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

json to_rows(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_array(m.row(i).transpose()));
  return out;
}

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw DataError(std::string("rule JSON: '") + what + "' must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Matrix matrix_from(const json& j, const char* what) {
  if (!j.is_array()) throw DataError(std::string("rule JSON: '") + what + "' must be an array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(std::string("rule JSON: '") + what + "' is not rectangular");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

json rule_to_json(const DecisionRule& rule) {
  json doc;
  doc["format"] = "itl-decision-rule";
  doc["format_version"] = kRuleFormatVersion;
  if (const auto* lin = std::get_if<LinearRule>(&rule.body)) {
    doc["type"] = "linear";
    doc["weights"] = to_array(lin->weights);
    doc["intercept"] = lin->intercept;
  } else {
    const auto& k = std::get<KernelRule>(rule.body);
    doc["type"] = "kernel";
    doc["kernel"] = {{"kind", to_string(k.spec.kind)}, {"bandwidth", k.spec.bandwidth}};
    doc["support"] = to_rows(k.support);
    doc["coefficients"] = to_array(k.coefficients);
    doc["intercept"] = k.intercept;
  }
  if (rule.standardization) {
    doc["standardization"] = {{"center", to_array(rule.standardization->center)},
                              {"scale", to_array(rule.standardization->scale)}};
  } else {
    doc["standardization"] = nullptr;
  }
  return doc;
}

DecisionRule rule_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "itl-decision-rule") {
      throw DataError("rule JSON: not an itl-decision-rule document");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kRuleFormatVersion) {
      throw DataError("rule JSON: unsupported format_version " + std::to_string(version));
    }
    DecisionRule rule;
    const std::string type = doc.at("type").get<std::string>();
    if (type == "linear") {
      rule.body = LinearRule{vector_from(doc.at("weights"), "weights"),
                             doc.at("intercept").get<double>()};
    } else if (type == "kernel") {
      const auto& k = doc.at("kernel");
      KernelSpec spec{kernel_kind_from_string(k.at("kind").get<std::string>()),
                      k.at("bandwidth").get<double>()};
      rule.body = KernelRule{spec, matrix_from(doc.at("support"), "support"),
                             vector_from(doc.at("coefficients"), "coefficients"),
                             doc.at("intercept").get<double>()};
    } else {
      throw DataError("rule JSON: unknown type '" + type + "'");
    }
    const auto& s = doc.at("standardization");
    if (!s.is_null()) {
      rule.standardization = Standardization{vector_from(s.at("center"), "center"),
                                             vector_from(s.at("scale"), "scale")};
    }
    rule.validate();
    return rule;
  } catch (const json::exception& e) {
    throw DataError(std::string("rule JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("rule JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("rule JSON: ") + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_rule(const std::string& path, const DecisionRule& rule) {
  write_file_atomic(path, rule_to_json(rule).dump(2) + "\n");
}

DecisionRule read_rule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rule file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("rule file " + path + ": " + e.what());
  }
  return rule_from_json(doc);
}

}  // namespace itl
