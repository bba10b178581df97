#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace uh {

// Outcome of fitting the constants of a two-sided inequality on samples.
struct BoundFit {
  std::string id;
  nlohmann::json constants = nlohmann::json::object();
  double worst_margin = 0.0;  // smallest slack observed, log domain where applicable
  bool stable = false;
  bool passed = false;
  std::string note;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// max(a,b)/min(a,b) < factor for positive finite a, b.
bool stable_pair(double a, double b, double factor = 2.0);

// Full-precision CSV formatting shared by report writers.
std::string csv_number(double v);

}  // namespace uh
