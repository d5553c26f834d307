#pragma once

#include <cmath>
#include <vector>

namespace pathwise {

/// Tanh-sinh rule on (0,1). Nodes cluster double-exponentially at both ends, so
/// integrands with algebraic endpoint singularities x^p (1-x)^q, p, q > -1, converge
/// exponentially in the number of nodes. The complement 1 - x is stored separately
/// because it cannot be recovered from x near the right end.
struct TanhSinhRule {
  std::vector<double> x;
  std::vector<double> xc;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }

  /// `step` is the spacing in the transformed variable; `min_exponent` is the smallest
  /// p + 1 (resp. q + 1) of the endpoint singularities the rule has to resolve.
  static TanhSinhRule make(double step = 1.0 / 6.0, double min_exponent = 0.5) {
    TanhSinhRule r;
    const double e = std::max(min_exponent, 1e-3);
    // truncate once x^e * dx/du drops below ~1e-18
    const double umax = std::asinh(45.0 / (e * M_PI));
    const int k = static_cast<int>(std::ceil(umax / step));
    for (int i = -k; i <= k; ++i) {
      const double u = i * step;
      const double s = M_PI * std::sinh(u);
      const double x = 1.0 / (1.0 + std::exp(-s));
      const double xc = 1.0 / (1.0 + std::exp(s));
      if (x == 0.0 || xc == 0.0) continue;
      r.x.push_back(x);
      r.xc.push_back(xc);
      r.w.push_back(step * M_PI * std::cosh(u) * x * xc);
    }
    return r;
  }
};

}  // namespace pathwise
