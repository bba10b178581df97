#include "ultraholo/fit.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace uh {

nlohmann::json BoundFit::to_json() const {
  return {{"id", id}, {"constants", constants}, {"worst_margin", std::isfinite(worst_margin) ? nlohmann::json(worst_margin) : nlohmann::json(nullptr)},
          {"stable", stable}, {"passed", passed}, {"note", note}, {"samples", rows.size()}};
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string BoundFit::to_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  for (auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_number(r[i]);
    os << "\n";
  }
  return os.str();
}

bool stable_pair(double a, double b, double factor) {
  if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b)) return false;
  return std::max(a, b) / std::min(a, b) < factor;
}

}  // namespace uh
