#include "allocgen/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "allocgen/error.hpp"
#include "allocgen/parallel.hpp"
#include "internal.hpp"

namespace allocgen {

namespace {

double common_step(const std::vector<RiskModel>& portfolio) {
  std::optional<double> h;
  for (const auto& r : portfolio) {
    const auto s = risk_step(r);
    if (!s) continue;
    if (h && std::abs(*h - *s) > 1e-12 * std::abs(*h))
      fail(ErrorCode::SizeMismatch, "risks use different lattice steps");
    h = s;
  }
  return h.value_or(1.0);
}

}  // namespace

AllocationTable allocate_independent(const std::vector<RiskModel>& portfolio, std::size_t kmax,
                                     const AllocationOptions& opts) {
  if (portfolio.empty()) fail(ErrorCode::InvalidArgument, "empty portfolio");
  if (!is_pow2(kmax)) fail(ErrorCode::InvalidSize, "kmax must be a power of two");
  for (const auto& r : portfolio) validate(r);
  const double h = common_step(portfolio);
  const std::size_t n = portfolio.size();

  std::vector<ComplexBuffer> fx(n);
  parallel_for(n, [&](std::size_t i) { fx[i] = risk_pgf_on_roots(portfolio[i], kmax); });
  const ComplexBuffer fs_dft = detail::ordered_product(fx, kmax);

  std::vector<std::vector<double>> alloc(n);
  std::vector<std::uint8_t> divided(n, 0);
  parallel_for(n, [&](std::size_t i) {
    ComplexBuffer others;
    if (detail::min_abs(fx[i]) > 1e-12) {
      others = fs_dft;
      for (std::size_t j = 0; j < kmax; ++j) others[j] /= fx[i][j];
      divided[i] = 1;
    } else {
      others = ComplexBuffer(kmax, cplx(1.0, 0.0));
      for (std::size_t m = 0; m < n; ++m)
        if (m != i) others *= fx[m];
    }
    ComplexBuffer mu = risk_phi_on_roots(portfolio[i], kmax);
    mu *= others;
    alloc[i] = idft(mu);
  });

  std::size_t support = 0;
  bool bounded = true;
  for (const auto& r : portfolio) {
    if (const auto* e = std::get_if<ExplicitRisk>(&r)) {
      std::size_t last = 0;
      for (std::size_t k = 0; k < e->pmf.size(); ++k)
        if (e->pmf[k] != 0.0) last = k;
      support += last;
      continue;
    }
    const auto m = risk_max_support(r);
    if (!m) {
      bounded = false;
      break;
    }
    support += *m;
  }
  std::vector<double> fs = idft(fs_dft);
  // Coefficients past the lattice support of S are structurally zero.
  if (bounded && support + 1 < kmax) {
    std::fill(fs.begin() + static_cast<std::ptrdiff_t>(support + 1), fs.end(), 0.0);
    for (auto& a : alloc) std::fill(a.begin() + static_cast<std::ptrdiff_t>(support + 1), a.end(), 0.0);
  }

  std::vector<double> means(n);
  for (std::size_t i = 0; i < n; ++i) means[i] = risk_mean_index(portfolio[i]) * h;
  AllocationTable t = make_table(std::move(fs), std::move(alloc), h, std::move(means), opts);
  if (bounded && support >= kmax)
    t.warnings.push_back("AliasingRisk: support of S reaches " + std::to_string(support) + " >= kmax " +
                         std::to_string(kmax));
  std::size_t fallbacks = 0;
  for (auto d : divided) fallbacks += d ? 0 : 1;
  t.diagnostics.emplace_back("method", "independent_fft");
  t.diagnostics.emplace_back("leave_one_out_products", std::to_string(fallbacks));
  return t;
}

KatzAllocation allocate_katz_closed_form(const KatzParams& katz, const DiscretePMF& fs) {
  katz.validate();
  const std::size_t n = fs.size();
  const double a = katz.a;
  const double ab = katz.a + katz.b;
  const double h = fs.step_h;
  KatzAllocation out;
  out.expected_allocation.assign(n, 0.0);
  out.expected_cumulative.assign(n, 0.0);
  double g = 0.0;
  double big_h = 0.0;
  double cum_fs = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    g = a * g + fs[k - 1];
    cum_fs += fs[k - 1];
    big_h = a * big_h + cum_fs;
    out.expected_allocation[k] = h * ab * g;
    out.expected_cumulative[k] = h * ab * big_h;
  }
  return out;
}

SeriesResult allocate_negbin_convolution(const std::vector<NegBinRisk>& portfolio, std::size_t k,
                                         std::size_t l_max) {
  if (portfolio.empty()) fail(ErrorCode::InvalidArgument, "empty portfolio");
  for (const auto& p : portfolio)
    if (!(p.r > 0.0) || !(p.q > 0.0 && p.q < 1.0))
      fail(ErrorCode::KatzDomain, "negative binomial needs r > 0 and 0 < q < 1");
  SeriesResult res;
  if (k == 0) return res;

  const std::size_t n = portfolio.size();
  std::vector<double> beta(n), alpha(n), theta(n);
  double beta_min = std::numeric_limits<double>::infinity();
  double r_total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    beta[j] = (1.0 - portfolio[j].q) / portfolio[j].q;
    alpha[j] = portfolio[j].r + (j == 0 ? 1.0 : 0.0);
    beta_min = std::min(beta_min, beta[j]);
    r_total += portfolio[j].r;
  }
  double log_r = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    theta[j] = 1.0 - beta_min / beta[j];
    log_r += alpha[j] * std::log(beta_min / beta[j]);
  }
  const double big_r = std::exp(log_r);
  const double q_star = 1.0 / (1.0 + beta_min);
  const std::size_t m = k - 1;
  const double lead = portfolio[0].r * beta[0];

  std::vector<double> xi{0.0};
  std::vector<double> delta{1.0};
  double shape = r_total + 1.0;
  double p = negbin_pmf(shape, q_star, m);
  double acc = 0.0;
  double mass = 0.0;
  for (std::size_t l = 0;; ++l) {
    if (l > 0) {
      double x = 0.0;
      for (std::size_t j = 0; j < n; ++j) x += alpha[j] * std::pow(theta[j], static_cast<double>(l));
      xi.push_back(x / static_cast<double>(l));
      double d = 0.0;
      for (std::size_t i = 1; i <= l; ++i) d += static_cast<double>(i) * xi[i] * delta[l - i];
      delta.push_back(d / static_cast<double>(l));
      p *= (shape + static_cast<double>(m)) / shape * q_star;
      shape += 1.0;
    }
    const double w = big_r * delta[l];
    const double term = w * p;
    acc += term;
    mass += w;
    res.terms = l + 1;
    const double remaining = std::max(0.0, 1.0 - mass);
    if (term <= 1e-14 * acc && remaining <= 1e-10) {
      res.value = lead * acc;
      res.tail_bound = lead * remaining;
      return res;
    }
    if (l + 1 >= l_max) {
      fail(ErrorCode::SeriesTruncation, "no convergence after " + std::to_string(l + 1) +
                                            " terms; remaining mixing mass " + std::to_string(remaining));
    }
  }
}

CompoundKatzAllocation allocate_compound_katz(const CompoundKatzRisk& risk, const ComplexBuffer& fs_others_dft,
                                              std::size_t kmax) {
  risk.frequency.validate();
  if (fs_others_dft.size() != kmax) fail(ErrorCode::SizeMismatch, "transform length differs from kmax");
  std::vector<double> sev = risk.severity.masses;
  if (sev.size() > kmax) fail(ErrorCode::InvalidSize, "severity longer than kmax");
  sev.resize(kmax, 0.0);
  std::vector<double> ksev(kmax);
  for (std::size_t k = 0; k < kmax; ++k) ksev[k] = static_cast<double>(k) * sev[k];

  const ComplexBuffer pb = dft(sev, kmax);
  ComplexBuffer mu = dft(ksev, kmax);
  const double a = risk.frequency.a;
  const double ab = risk.frequency.a + risk.frequency.b;
  double worst = 0.0;
  for (std::size_t j = 0; j < kmax; ++j) worst = std::max(worst, std::abs(a * pb[j]));

  CompoundKatzAllocation out;
  if (worst < 1.0 - 1e-12) {
    for (std::size_t j = 0; j < kmax; ++j)
      mu[j] *= ab / (1.0 - a * pb[j]) * risk.frequency.pgf(pb[j]) * fs_others_dft[j];
  } else {
    // P_M'(P_B) summed from the frequency pmf instead of the closed form.
    out.used_composition_form = true;
    const std::vector<double> fm = risk.frequency.pmf(kmax);
    for (std::size_t j = 0; j < kmax; ++j) {
      cplx d(0.0, 0.0);
      for (std::size_t k = kmax - 1; k >= 1; --k) d = d * pb[j] + static_cast<double>(k) * fm[k];
      mu[j] *= d * fs_others_dft[j];
    }
  }
  out.expected_allocation = idft(mu);
  return out;
}

}  // namespace allocgen
