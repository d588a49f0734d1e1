#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace allocgen {

/// Katz, or (a, b, 0), frequency: f(k) = (a + b/k) f(k-1).
struct KatzParams {
  double a = 0.0;
  double b = 0.0;

  static KatzParams poisson(double lambda);
  /// Number of failures before the r-th success, success probability q.
  static KatzParams negative_binomial(double r, double q);
  static KatzParams binomial(unsigned m, double q);

  void validate() const;
  double mean() const { return (a + b) / (1.0 - a); }
  double f0() const;
  std::complex<double> pgf(std::complex<double> w) const;
  /// Derivative of the pgf, (a + b) / (1 - a w) * P(w).
  std::complex<double> pgf_derivative(std::complex<double> w) const;
  /// First n masses via the recursion.
  std::vector<double> pmf(std::size_t n) const;
};

double poisson_pmf(double lambda, std::size_t k);
double negbin_pmf(double r, double q, std::size_t k);

}  // namespace allocgen
