#include "allocgen/pmf.hpp"

#include <cmath>
#include <string>

#include "allocgen/error.hpp"

namespace allocgen {

double DiscretePMF::total() const {
  double s = 0.0;
  for (double m : masses) s += m;
  return s;
}

std::vector<double> clamp_roundoff(std::vector<double> values, double* clamped) {
  double c = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    double& v = values[k];
    if (!std::isfinite(v)) fail(ErrorCode::InvalidPMF, "non-finite mass at index " + std::to_string(k));
    if (v < 0.0) {
      if (v < -kNegativeTolerance)
        fail(ErrorCode::InvalidPMF,
             "mass " + std::to_string(v) + " at index " + std::to_string(k) + " below -1e-12");
      c += v;
      v = 0.0;
    }
  }
  if (clamped) *clamped = c;
  return values;
}

DiscretePMF pmf_from_values(std::vector<double> values, double step_h) {
  if (values.empty()) fail(ErrorCode::InvalidPMF, "empty value vector");
  if (!(step_h > 0.0) || !std::isfinite(step_h)) fail(ErrorCode::InvalidPMF, "step_h must be positive");
  DiscretePMF pmf;
  pmf.step_h = step_h;
  pmf.masses = clamp_roundoff(std::move(values), &pmf.clamped_mass);
  const double total = pmf.total();
  if (total > 1.0 + 1e-9) fail(ErrorCode::InvalidPMF, "masses sum to " + std::to_string(total));
  if (total < 1.0 - 1e-9) pmf.truncation_mass = 1.0 - total;
  return pmf;
}

double mean(const DiscretePMF& pmf) {
  double s = 0.0;
  for (std::size_t k = 0; k < pmf.masses.size(); ++k) s += static_cast<double>(k) * pmf.masses[k];
  return s * pmf.step_h;
}

std::vector<double> cdf(const DiscretePMF& pmf) {
  std::vector<double> out(pmf.masses.size());
  double s = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    s += pmf.masses[k];
    out[k] = s;
  }
  return out;
}

std::pair<DiscretePMF, TruncationReport> arithmetize(const RealFn& cdf_fn, const RealFn& lev_fn,
                                                     Discretization method, std::size_t kmax,
                                                     double step_h, std::optional<double> true_mean) {
  if (!cdf_fn) fail(ErrorCode::InvalidArgument, "cdf callable is required");
  if (kmax < 2) fail(ErrorCode::InvalidSize, "kmax must be at least 2");
  if (!(step_h > 0.0)) fail(ErrorCode::InvalidArgument, "step_h must be positive");
  const double h = step_h;
  const std::size_t m = kmax - 1;
  std::vector<double> f(kmax);
  double total = 0.0;

  switch (method) {
    case Discretization::upper:
      for (std::size_t j = 0; j < kmax; ++j)
        f[j] = cdf_fn(static_cast<double>(j + 1) * h) - (j == 0 ? 0.0 : cdf_fn(static_cast<double>(j) * h));
      total = cdf_fn(static_cast<double>(kmax) * h);
      break;
    case Discretization::lower:
      f[0] = cdf_fn(0.0);
      for (std::size_t j = 1; j < kmax; ++j)
        f[j] = cdf_fn(static_cast<double>(j) * h) - cdf_fn(static_cast<double>(j - 1) * h);
      total = cdf_fn(static_cast<double>(m) * h);
      break;
    case Discretization::moment_matching: {
      if (!lev_fn) fail(ErrorCode::MissingLEV, "moment matching needs a limited expected value function");
      std::vector<double> lev(kmax + 1);
      for (std::size_t j = 0; j <= kmax; ++j) lev[j] = lev_fn(static_cast<double>(j) * h);
      f[0] = 1.0 - lev[1] / h;
      for (std::size_t j = 1; j < m; ++j) f[j] = (2.0 * lev[j] - lev[j - 1] - lev[j + 1]) / h;
      f[m] = (lev[m] - lev[m - 1]) / h - 1.0 + cdf_fn(static_cast<double>(m) * h);
      total = cdf_fn(static_cast<double>(m) * h);
      break;
    }
  }

  DiscretePMF pmf;
  pmf.step_h = h;
  pmf.masses = clamp_roundoff(std::move(f), &pmf.clamped_mass);
  pmf.truncation_mass = std::max(0.0, 1.0 - total);

  TruncationReport rep;
  rep.kmax = kmax;
  rep.lost_mass = pmf.truncation_mass;
  if (true_mean)
    rep.lost_mean = std::max(0.0, *true_mean - mean(pmf));
  else
    rep.lost_mean = static_cast<double>(m) * h * rep.lost_mass;
  return {std::move(pmf), rep};
}

bool is_pow2(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) {
    if (p > (std::size_t{1} << 62)) fail(ErrorCode::InvalidSize, "size too large");
    p <<= 1;
  }
  return p;
}

DiscretePMF padded(const DiscretePMF& pmf, std::size_t n) {
  DiscretePMF out = pmf;
  if (n < pmf.masses.size()) {
    for (std::size_t k = n; k < pmf.masses.size(); ++k)
      if (pmf.masses[k] != 0.0)
        fail(ErrorCode::InvalidSize, "pmf has mass beyond index " + std::to_string(n - 1));
  }
  out.masses.resize(n, 0.0);
  return out;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b, std::size_t len) {
  if (a.empty() || b.empty()) return {};
  if (len == 0) len = a.size() + b.size() - 1;
  std::vector<double> out(len, 0.0);
  for (std::size_t i = 0; i < a.size() && i < len; ++i) {
    if (a[i] == 0.0) continue;
    const std::size_t jmax = std::min(b.size(), len - i);
    for (std::size_t j = 0; j < jmax; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

}  // namespace allocgen
