#include "allocgen/katz.hpp"

#include <cmath>
#include <string>

#include "allocgen/error.hpp"

namespace allocgen {

KatzParams KatzParams::poisson(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorCode::KatzDomain, "Poisson rate must be >= 0");
  return {0.0, lambda};
}

KatzParams KatzParams::negative_binomial(double r, double q) {
  if (!(r > 0.0) || !(q > 0.0 && q <= 1.0))
    fail(ErrorCode::KatzDomain, "negative binomial needs r > 0 and 0 < q <= 1");
  return {1.0 - q, (r - 1.0) * (1.0 - q)};
}

KatzParams KatzParams::binomial(unsigned m, double q) {
  if (!(q >= 0.0 && q < 0.5))
    fail(ErrorCode::KatzDomain, "binomial Katz form requires 0 <= q < 1/2 (|a| < 1)");
  return {-q / (1.0 - q), static_cast<double>(m + 1) * q / (1.0 - q)};
}

void KatzParams::validate() const {
  if (!(std::abs(a) < 1.0)) fail(ErrorCode::KatzDomain, "|a| must be < 1, got a=" + std::to_string(a));
  if (!std::isfinite(b) || a + b < 0.0)
    fail(ErrorCode::KatzDomain, "a + b must be >= 0, got b=" + std::to_string(b));
}

double KatzParams::f0() const {
  if (a == 0.0) return std::exp(-b);
  return std::exp((b / a + 1.0) * std::log1p(-a));
}

std::complex<double> KatzParams::pgf(std::complex<double> w) const {
  if (a == 0.0) return std::exp(b * (w - 1.0));
  const std::complex<double> one(1.0, 0.0);
  return std::exp((b / a + 1.0) * (std::log1p(-a) - std::log(one - a * w)));
}

std::complex<double> KatzParams::pgf_derivative(std::complex<double> w) const {
  return (a + b) / (1.0 - a * w) * pgf(w);
}

std::vector<double> KatzParams::pmf(std::size_t n) const {
  validate();
  std::vector<double> f(n, 0.0);
  if (n == 0) return f;
  f[0] = f0();
  for (std::size_t k = 1; k < n; ++k) {
    const double factor = a + b / static_cast<double>(k);
    if (factor <= 1e-15) break;  // binomial support ends
    f[k] = factor * f[k - 1];
  }
  return f;
}

double poisson_pmf(double lambda, std::size_t k) {
  if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0));
}

double negbin_pmf(double r, double q, std::size_t k) {
  const double kd = static_cast<double>(k);
  double lp = std::lgamma(r + kd) - std::lgamma(r) - std::lgamma(kd + 1.0) + r * std::log(q);
  if (k > 0) lp += kd * std::log1p(-q);
  return std::exp(lp);
}

}  // namespace allocgen
