#pragma once

#include <functional>

#include "ultraholo/weightfn.hpp"

namespace uh {

// Auto uses closed forms carried by the expression nodes when present.
enum class ConjMode { Auto, Numeric };

struct LogMax {
  double value;
  double arg;           // maximizing log abscissa
  bool at_lower_limit;  // sup approached as the abscissa tends to -inf
};

// sup over u in R of g(u). The search starts on [lo, hi] with a 64-point grid,
// doubles the bracket while the best point sits on an edge, then refines the
// best local maxima with Brent. Throws unbounded-objective if the sup runs
// off the upper limit.
LogMax maximize_log_abscissa(const std::function<double(double)>& g, double lo = -18.420680743952367,
                             double hi = 18.420680743952367, double lo_limit = -740.0,
                             double hi_limit = 700.0);

// phi*_omega(x) = sup_y { x y - omega(e^y) }
double phi_star(const WeightFunction& w, double x, ConjMode mode = ConjMode::Auto);
// omega*(s) = sup_{t >= 0} { omega(t) - s t }; +inf at s = 0.
double upper_star(const WeightFunction& w, double s, ConjMode mode = ConjMode::Auto);
// h_star(t) = inf_{s > 0} { h(s) + t s }; h_star(0) is the limit of h at infinity.
double lower_star(const std::function<double(double)>& h, double t);
double lower_star(const WeightFunction& h, double t);

WeightFunction least_concave_majorant(const WeightFunction& w);

}  // namespace uh
