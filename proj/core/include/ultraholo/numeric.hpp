#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace uh {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Error with a stable machine-readable code, e.g. "horizon-exhausted".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

inline double log_factorial(double p) { return std::lgamma(p + 1.0); }

// n points log-spaced on [a, b], inclusive.
inline std::vector<double> log_grid(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i) {
    double f = n == 1 ? 0.0 : double(i) / double(n - 1);
    g[i] = std::exp(la + f * (lb - la));
  }
  return g;
}

inline std::vector<double> lin_grid(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = n == 1 ? a : a + (b - a) * double(i) / double(n - 1);
  return g;
}

// Relative closeness with an absolute floor.
inline bool close(double a, double b, double rel, double abs_floor = 0.0) {
  return std::fabs(a - b) <= std::max(abs_floor, rel * std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace uh
