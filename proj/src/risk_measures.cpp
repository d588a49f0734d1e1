#include "allocgen/risk_measures.hpp"

#include <cmath>
#include <string>

#include "allocgen/error.hpp"

namespace allocgen {

void RVaRLevels::validate() const {
  if (!(alpha1 >= 0.0 && alpha1 <= alpha2 && alpha2 <= 1.0))
    fail(ErrorCode::InvalidArgument, "RVaR levels need 0 <= alpha1 <= alpha2 <= 1");
}

namespace {

void check_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) fail(ErrorCode::InvalidArgument, "kappa must lie in (0, 1)");
}

// Lower levels may be 0, where the tail is the whole distribution.
void check_lower(double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) fail(ErrorCode::InvalidArgument, "kappa must lie in [0, 1)");
}

std::size_t quantile_index(const std::vector<double>& F, double kappa) {
  for (std::size_t k = 0; k < F.size(); ++k)
    if (F[k] >= kappa) return k;
  fail(ErrorCode::TruncatedQuantile, "cdf tops out at " + std::to_string(F.empty() ? 0.0 : F.back()) +
                                         " below level " + std::to_string(kappa));
}

// Sum over lo < k <= hi of k h f(k).
double layer_mean(const DiscretePMF& fs, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t k = lo + 1; k <= hi && k < fs.size(); ++k) s += static_cast<double>(k) * fs[k];
  return s * fs.step_h;
}

}  // namespace

std::size_t var_index(const DiscretePMF& fs, double kappa) {
  check_kappa(kappa);
  return quantile_index(cdf(fs), kappa);
}

double var_level(const DiscretePMF& fs, double kappa) {
  return static_cast<double>(var_index(fs, kappa)) * fs.step_h;
}

double tvar(const DiscretePMF& fs, double kappa) {
  check_lower(kappa);
  const auto F = cdf(fs);
  const std::size_t v = quantile_index(F, kappa);
  const double vh = static_cast<double>(v) * fs.step_h;
  return (layer_mean(fs, v, fs.size() - 1) + vh * (F[v] - kappa)) / (1.0 - kappa);
}

double rvar(const DiscretePMF& fs, const RVaRLevels& levels) {
  levels.validate();
  if (levels.alpha1 == levels.alpha2) return var_level(fs, levels.alpha1);
  if (levels.alpha2 == 1.0) return tvar(fs, levels.alpha1);
  check_lower(levels.alpha1);
  const auto F = cdf(fs);
  const std::size_t v1 = quantile_index(F, levels.alpha1);
  const std::size_t v2 = quantile_index(F, levels.alpha2);
  const double h = fs.step_h;
  const double num = static_cast<double>(v1) * h * (F[v1] - levels.alpha1) + layer_mean(fs, v1, v2) +
                     static_cast<double>(v2) * h * (levels.alpha2 - F[v2]);
  return num / (levels.alpha2 - levels.alpha1);
}

std::vector<double> euler_rvar_contributions(const AllocationTable& table, const RVaRLevels& levels) {
  levels.validate();
  const std::size_t n = table.n_risks();
  const auto F = cdf(table.fs);
  auto boundary = [&](std::size_t v) {
    if (!table.valid_mask[v] || !(table.fs_raw[v] > table.underflow_floor))
      fail(ErrorCode::BoundaryUnderflow,
           "boundary atom k=" + std::to_string(v) + " (f_S=" + std::to_string(table.fs_raw[v]) + ") is not valid");
  };
  auto cond = [&](std::size_t i, std::size_t v) { return table.expected_allocation[i][v] / table.fs_raw[v]; };
  // Summing the layer directly keeps round-off from outside it out of the contribution.
  auto layer = [&](std::size_t i, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t k = lo + 1; k <= hi; ++k) s += table.expected_allocation[i][k];
    return s;
  };

  std::vector<double> out(n, 0.0);
  if (levels.alpha1 == levels.alpha2) {
    check_kappa(levels.alpha1);
    const std::size_t v = quantile_index(F, levels.alpha1);
    boundary(v);
    for (std::size_t i = 0; i < n; ++i) out[i] = cond(i, v);
    return out;
  }
  check_lower(levels.alpha1);
  const std::size_t v1 = quantile_index(F, levels.alpha1);
  const double w1 = F[v1] - levels.alpha1;
  // At alpha1 = 0 the lower atom is k = 0, entirely inside the range.
  const bool whole_lower = levels.alpha1 == 0.0;
  if (!whole_lower) boundary(v1);
  auto lower = [&](std::size_t i) { return whole_lower ? table.expected_allocation[i][0] : cond(i, v1) * w1; };
  if (levels.alpha2 == 1.0) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = (lower(i) + layer(i, v1, table.kmax() - 1)) / (1.0 - levels.alpha1);
    return out;
  }
  const std::size_t v2 = quantile_index(F, levels.alpha2);
  boundary(v2);
  const double w2 = levels.alpha2 - F[v2];
  for (std::size_t i = 0; i < n; ++i)
    out[i] = (lower(i) + layer(i, v1, v2) + cond(i, v2) * w2) / (levels.alpha2 - levels.alpha1);
  return out;
}

}  // namespace allocgen
