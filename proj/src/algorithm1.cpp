#include <algorithm>
#include <cmath>
#include <string>

#include "allocgen/allocation.hpp"
#include "allocgen/error.hpp"
#include "allocgen/parallel.hpp"
#include "internal.hpp"

namespace allocgen {

namespace {

struct CompoundPoissonView {
  double lambda;
  const std::vector<double>* severity;
};

std::vector<double> shifted_derivative(const std::vector<double>& f, std::size_t kmax) {
  std::vector<double> out(kmax, 0.0);
  for (std::size_t k = 0; k + 1 < f.size() && k < kmax; ++k) out[k] = static_cast<double>(k + 1) * f[k + 1];
  return out;
}

}  // namespace

AllocationTable run_algorithm_1(const std::vector<RiskModel>& portfolio, std::size_t kmax,
                                const Algorithm1Options& opts) {
  if (portfolio.empty()) fail(ErrorCode::InvalidArgument, "empty portfolio");
  if (!is_pow2(kmax)) fail(ErrorCode::InvalidSize, "kmax must be a power of two");
  const std::size_t n = portfolio.size();
  std::vector<CompoundPoissonView> risks(n);
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto* c = std::get_if<CompoundKatzRisk>(&portfolio[i]);
    if (!c || c->frequency.a != 0.0)
      fail(ErrorCode::InvalidArgument, "risk " + std::to_string(i + 1) + " is not compound Poisson");
    c->frequency.validate();
    if (c->severity.size() > kmax) fail(ErrorCode::InvalidSize, "severity longer than kmax");
    if (h == 0.0) h = c->severity.step_h;
    if (std::abs(c->severity.step_h - h) > 1e-12 * h) fail(ErrorCode::SizeMismatch, "mixed lattice steps");
    risks[i] = {c->frequency.b, &c->severity.masses};
  }

  // Every sequence here is real, so bins 0..kmax/2 carry the whole spectrum.
  const std::size_t nh = kmax / 2 + 1;
  const std::size_t cache_bytes = n * nh * sizeof(cplx);
  const bool cached = !opts.force_streaming && cache_bytes <= opts.memory_budget_bytes;
  std::vector<std::vector<cplx>> phi(cached ? n : 0);
  auto phi_half = [&](std::size_t i) {
    std::vector<cplx> out(nh);
    const auto d = shifted_derivative(*risks[i].severity, kmax);
    detail::rdft_half(d.data(), d.size(), kmax, out.data());
    return out;
  };

  // Pass 1: f_S on the roots as exp(sum_i lambda_i (f_B - 1)), one exponential per chunk.
  const std::size_t chunks = (n + detail::kProductChunk - 1) / detail::kProductChunk;
  std::vector<std::vector<cplx>> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> re(nh, 0.0), im(nh, 0.0);
    std::vector<cplx> fb(nh);
    const std::size_t end = std::min(n, (c + 1) * detail::kProductChunk);
    for (std::size_t i = c * detail::kProductChunk; i < end; ++i) {
      const auto& sev = *risks[i].severity;
      detail::rdft_half(sev.data(), sev.size(), kmax, fb.data());
      const double lam = risks[i].lambda;
      for (std::size_t j = 0; j < nh; ++j) {
        re[j] += lam * (fb[j].real() - 1.0);
        im[j] += lam * fb[j].imag();
      }
      if (cached) phi[i] = phi_half(i);
    }
    std::vector<cplx> acc(nh);
    for (std::size_t j = 0; j < nh; ++j) {
      const double r = std::exp(re[j]);
      acc[j] = cplx(r * std::cos(im[j]), r * std::sin(im[j]));
    }
    partial[c] = std::move(acc);
  });
  std::vector<cplx> fs_dft(nh, cplx(1.0, 0.0));
  for (const auto& p : partial)
    for (std::size_t j = 0; j < nh; ++j) fs_dft[j] = detail::mul(fs_dft[j], p[j]);
  partial.clear();

  // Pass 2: mu_i = lambda_i e1 phi_B f_S, inverted. The factor e1 is applied as an exact
  // one-step shift of the inverted sequence.
  std::vector<std::vector<double>> alloc(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<cplx> mu = cached ? std::move(phi[i]) : phi_half(i);
    const double lam = risks[i].lambda;
    for (std::size_t j = 0; j < nh; ++j) mu[j] = lam * detail::mul(fs_dft[j], mu[j]);
    alloc[i].resize(kmax);
    detail::irdft_half(mu.data(), kmax, alloc[i].data());
    std::rotate(alloc[i].rbegin(), alloc[i].rbegin() + 1, alloc[i].rend());
    if (cached) std::vector<cplx>().swap(phi[i]);
  });
  phi.clear();
  phi.shrink_to_fit();

  std::vector<double> fs(kmax);
  detail::irdft_half(fs_dft.data(), kmax, fs.data());
  std::vector<double> means(n);
  for (std::size_t i = 0; i < n; ++i) means[i] = risk_mean_index(portfolio[i]) * h;
  AllocationTable t = make_table(std::move(fs), std::move(alloc), h, std::move(means), opts.allocation);
  t.diagnostics.emplace_back("method", "algorithm_1");
  t.diagnostics.emplace_back("transform_cache", cached ? "cached" : "streaming");
  return t;
}

}  // namespace allocgen
