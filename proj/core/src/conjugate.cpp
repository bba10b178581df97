#include "ultraholo/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace uh {

namespace {

constexpr int kGrid = 64;

double safe(double v) { return std::isnan(v) ? -kInf : v; }

}  // namespace

LogMax maximize_log_abscissa(const std::function<double(double)>& g, double lo, double hi,
                             double lo_limit, double hi_limit) {
  std::vector<double> us(kGrid), gs(kGrid);
  struct Peak {
    double a, b, value;
  };
  // Interior local maxima of every grid pass; a bracket that slides toward an edge must not lose them.
  std::vector<Peak> peaks;
  auto fill = [&] {
    for (int i = 0; i < kGrid; ++i) {
      us[i] = lo + (hi - lo) * double(i) / double(kGrid - 1);
      gs[i] = safe(g(us[i]));
    }
    for (int i = 1; i + 1 < kGrid; ++i)
      // flat stretches (rounding plateaus) are not peaks
      if (gs[i] >= gs[i - 1] && gs[i] >= gs[i + 1] && (gs[i] > gs[i - 1] || gs[i] > gs[i + 1]) && gs[i] > -kInf)
        peaks.push_back({us[i - 1], us[i + 1], gs[i]});
  };
  fill();
  for (int guard = 0; guard < 64; ++guard) {
    int best = int(std::max_element(gs.begin(), gs.end()) - gs.begin());
    bool top = best == kGrid - 1 && hi < hi_limit;
    bool bottom = best == 0 && lo > lo_limit;
    if (!top && !bottom) break;
    double w = hi - lo;
    if (top) {
      lo = hi - 0.25 * w;
      hi = std::min(hi_limit, hi + w);
    } else {
      hi = lo + 0.25 * w;
      lo = std::max(lo_limit, lo - w);
    }
    fill();
  }
  int best = int(std::max_element(gs.begin(), gs.end()) - gs.begin());
  if (best == kGrid - 1 && hi >= hi_limit && gs[kGrid - 1] > gs[kGrid - 2])
    throw Error("unbounded-objective", "supremum escapes the upper limit of the bracket");

  LogMax out{gs[best], us[best], false};
  if (best == 0 && lo <= lo_limit && gs[0] >= gs[1]) out.at_lower_limit = true;
  else if (best == kGrid - 1) peaks.push_back({us[kGrid - 2], us[kGrid - 1], gs[kGrid - 1]});
  else if (best == 0) peaks.push_back({us[0], us[1], gs[0]});

  std::sort(peaks.begin(), peaks.end(), [](const Peak& x, const Peak& y) { return x.value > y.value; });
  if (peaks.size() > 3) peaks.resize(3);
  for (auto& pk : peaks) {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::brent_find_minima([&](double u) { return -safe(g(u)); }, pk.a, pk.b,
                                                   std::numeric_limits<double>::digits, iters);
    double v = -r.second;
    if (v > out.value) out = {v, r.first, false};
  }
  return out;
}

double phi_star(const WeightFunction& w, double x, ConjMode mode) {
  if (x < 0) throw Error("negative-argument", "phi_star needs x >= 0");
  if (x == 0) return 0.0;
  if (mode == ConjMode::Auto)
    if (auto v = w.expr()->phi_star(x)) return *v;
  auto r = maximize_log_abscissa([&](double y) { return x * y - w(std::exp(y)); });
  // sup over all y; nonnegative by itself when omega vanishes near 0
  return r.value;
}

double upper_star(const WeightFunction& w, double s, ConjMode mode) {
  if (s < 0) throw Error("negative-argument", "upper_star needs s >= 0");
  if (s == 0) return kInf;
  if (mode == ConjMode::Auto)
    if (auto v = w.expr()->upper_star(s)) return *v;
  const double at0 = w(0.0);
  auto r = maximize_log_abscissa([&](double u) { return w(std::exp(u)) - s * std::exp(u); });
  return std::max(at0, r.value);
}

double lower_star(const std::function<double(double)>& h, double t) {
  if (t < 0) throw Error("negative-argument", "lower_star needs t >= 0");
  if (t == 0) {
    // Tail sampling of h at s = 1e4, 1e8, ..., 1e64.
    double prev = h(1e4), prev_diff = kInf;
    for (double s : {1e8, 1e16, 1e32, 1e64}) {
      double v = h(s), d = std::fabs(v - prev);
      if (d <= 1e-10 * std::max(1.0, std::fabs(v))) return v;
      if (d > prev_diff) break;
      prev = v;
      prev_diff = d;
    }
    if (prev_diff <= 1e-6 * std::max(1.0, std::fabs(prev))) return prev;
    throw Error("no-decay", "h does not settle to a finite limit at infinity");
  }
  auto r = maximize_log_abscissa([&](double v) { return -(h(std::exp(v)) + t * std::exp(v)); });
  return -r.value;
}

double lower_star(const WeightFunction& h, double t) {
  return lower_star([&](double s) { return h(s); }, t);
}

WeightFunction least_concave_majorant(const WeightFunction& w) {
  return lower_star_of(upper_star_of(w));
}

}  // namespace uh
