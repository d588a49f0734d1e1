#include <cmath>
#include <limits>
#include <string>

#include "allocgen/allocation.hpp"
#include "allocgen/error.hpp"
#include "allocgen/parallel.hpp"
#include "internal.hpp"

namespace allocgen {

namespace detail {

ComplexBuffer ordered_product(const std::vector<ComplexBuffer>& factors, std::size_t kmax) {
  const std::size_t n = factors.size();
  const std::size_t chunks = (n + kProductChunk - 1) / kProductChunk;
  std::vector<ComplexBuffer> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    ComplexBuffer acc(kmax, cplx(1.0, 0.0));
    const std::size_t end = std::min(n, (c + 1) * kProductChunk);
    for (std::size_t i = c * kProductChunk; i < end; ++i) acc *= factors[i];
    partial[c] = std::move(acc);
  });
  ComplexBuffer out(kmax, cplx(1.0, 0.0));
  for (const auto& p : partial) out *= p;
  return out;
}

double min_abs(const ComplexBuffer& b) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : b) m = std::min(m, std::abs(v));
  return m;
}

}  // namespace detail

std::size_t AllocationTable::valid_count() const {
  std::size_t c = 0;
  for (auto v : valid_mask) c += v ? 1 : 0;
  return c;
}

double AllocationTable::max_identity_error() const {
  std::vector<double> sum(kmax(), 0.0);
  for (std::size_t i = 0; i < n_risks(); ++i)
    for (std::size_t k = 0; k < kmax(); ++k) sum[k] += expected_allocation[i][k];
  double worst = 0.0;
  for (std::size_t k = 0; k < kmax(); ++k) {
    if (!valid_mask[k]) continue;
    const double target = static_cast<double>(k) * step_h * fs_raw[k];
    worst = std::max(worst, std::abs(sum[k] - target) / (1.0 + std::abs(target)));
  }
  return worst;
}

AllocationTable mask_validity(AllocationTable t, double tol, double underflow_floor) {
  const std::size_t kmax = t.kmax();
  const std::size_t n = t.n_risks();
  t.tolerance_used = tol;
  t.underflow_floor = underflow_floor;
  t.conditional_mean.assign(n, std::vector<double>(kmax, std::numeric_limits<double>::quiet_NaN()));
  t.valid_mask.assign(kmax, 0);
  std::vector<double> total(kmax, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mu = t.expected_allocation[i];
    auto& cond = t.conditional_mean[i];
    for (std::size_t k = 0; k < kmax; ++k) {
      const double f = t.fs_raw[k];
      if (!(f > underflow_floor)) continue;
      cond[k] = mu[k] / f;
      total[k] += cond[k];
    }
  }
  for (std::size_t k = 0; k < kmax; ++k) {
    if (!(t.fs_raw[k] > underflow_floor)) continue;
    const double kh = static_cast<double>(k) * t.step_h;
    t.valid_mask[k] = std::abs(total[k] - kh) <= tol ? 1 : 0;
  }
  return t;
}

AllocationTable make_table(std::vector<double> fs_raw, std::vector<std::vector<double>> alloc_index, double step_h,
                           std::vector<double> risk_means, const AllocationOptions& opts) {
  const std::size_t kmax = fs_raw.size();
  bool any = false;
  for (double f : fs_raw) any = any || f > opts.underflow_floor;
  if (!any) fail(ErrorCode::EmptyDistribution, "f_S has no entry above the underflow floor");

  AllocationTable t;
  t.step_h = step_h;
  t.fs.step_h = step_h;
  t.fs.masses = clamp_roundoff(fs_raw, &t.fs.clamped_mass);
  const double total = t.fs.total();
  t.fs.truncation_mass = std::max(0.0, 1.0 - total);
  t.fs_raw = std::move(fs_raw);

  const std::size_t n = alloc_index.size();
  t.expected_allocation = std::move(alloc_index);
  t.expected_cumulative.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& mu = t.expected_allocation[i];
    if (mu.size() != kmax) fail(ErrorCode::SizeMismatch, "allocation vector length differs from f_S");
    // Nonnegative risks carry no allocation on atoms of S with zero mass.
    for (std::size_t k = 0; k < kmax; ++k) mu[k] = t.fs.masses[k] == 0.0 ? 0.0 : mu[k] * step_h;
    t.expected_cumulative[i] = partial_sum_coeffs(mu);
  }
  t.risk_means = std::move(risk_means);
  t.truncation.kmax = kmax;
  t.truncation.lost_mass = t.fs.truncation_mass;
  double lost_mean = 0.0;
  for (std::size_t i = 0; i < n && i < t.risk_means.size(); ++i)
    if (std::isfinite(t.risk_means[i]))
      lost_mean += std::max(0.0, t.risk_means[i] - t.expected_cumulative[i].back());
  t.truncation.lost_mean = lost_mean;
  return mask_validity(std::move(t), opts.tolerance, opts.underflow_floor);
}

AllocationTable table_from_transforms(const ComplexBuffer& fs_dft, const std::vector<ComplexBuffer>& alloc_dfts,
                                      double step_h, std::vector<double> risk_means,
                                      const AllocationOptions& opts) {
  std::vector<std::vector<double>> alloc(alloc_dfts.size());
  parallel_for(alloc_dfts.size(), [&](std::size_t i) {
    if (alloc_dfts[i].size() != fs_dft.size()) fail(ErrorCode::SizeMismatch, "transform lengths differ");
    alloc[i] = idft(alloc_dfts[i]);
  });
  return make_table(idft(fs_dft), std::move(alloc), step_h, std::move(risk_means), opts);
}

LayerSplit cumulative_and_layers(const AllocationTable& table, std::size_t l1, std::size_t l2, std::size_t risk) {
  if (risk >= table.n_risks()) fail(ErrorCode::InvalidArgument, "risk index out of range");
  if (l1 >= l2) fail(ErrorCode::InvalidLayer, "need l1 < l2, got " + std::to_string(l1) + " >= " + std::to_string(l2));
  if (l2 >= table.kmax()) fail(ErrorCode::InvalidLayer, "l2 beyond the computed lattice");
  const auto& cum = table.expected_cumulative[risk];
  LayerSplit out;
  out.retained = cum[l1];
  out.layer = cum[l2] - cum[l1];
  const double total = risk < table.risk_means.size() && std::isfinite(table.risk_means[risk])
                           ? table.risk_means[risk]
                           : cum.back();
  out.excess = total - cum[l2];
  return out;
}

}  // namespace allocgen
