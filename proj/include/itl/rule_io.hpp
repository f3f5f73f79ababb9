#pragma once

#include <string>

#include <json.hpp>

#include "itl/core_model.hpp"

namespace itl {

inline constexpr int kRuleFormatVersion = 1;

// Self-describing document:
//   {"format": "itl-decision-rule", "format_version": 1, "type": "linear",
//    "weights": [...], "intercept": b, "standardization": null | {...}}
// Kernel rules carry "kernel", "support" and "coefficients" instead of
// "weights". Doubles are written with round-trip precision.
nlohmann::json rule_to_json(const DecisionRule& rule);
DecisionRule rule_from_json(const nlohmann::json& doc);

void write_rule(const std::string& path, const DecisionRule& rule);
DecisionRule read_rule(const std::string& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace itl
