#include "mrswme/path_integral.hpp"

#include <cmath>

#include "mrswme/errors.hpp"

namespace mrswme {

PathWeights path_weights(double h0, double h1) {
  if (!(h0 > 0.0 && h1 > 0.0)) {
    throw SolverError("path integral: nonpositive depth on the integration path");
  }
  PathWeights w;
  w.inv_hbar = 2.0 / (h0 + h1);
  const double x = (h1 - h0) / (h1 + h0);
  if (std::abs(x) < 0.25) {
    // atanh(x)/x = sum_k x^{2k}/(2k+1); 30 terms reach round-off at |x| = 0.25
    const double x2 = x * x;
    double tail = 0.0;
    for (int k = 30; k >= 1; --k) tail = 1.0 / (2 * k + 1) + x2 * tail;
    w.f0 = 1.0 + x2 * tail;
    w.f1 = x * tail;
  } else {
    w.f0 = std::atanh(x) / x;
    w.f1 = (w.f0 - 1.0) / x;
  }
  return w;
}

double linear_ratio_mean(double h0, double h1, double chi0, double chi1) {
  return path_weights(h0, h1).ratio(chi0, chi1);
}

}  // namespace mrswme
