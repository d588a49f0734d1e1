#include <cmath>
#include <string>

#include "allocgen/allocation.hpp"
#include "allocgen/dependence.hpp"
#include "allocgen/error.hpp"

namespace allocgen {

std::vector<double> oracle_size_biased(const RiskModel& risk, const DiscretePMF& others_pmf) {
  validate(risk);
  const std::size_t n = others_pmf.size();
  const double h = others_pmf.step_h;
  const std::vector<double> f = risk_pmf(risk, next_pow2(n));
  double m = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) m += static_cast<double>(x) * f[x];
  std::vector<double> out(n, 0.0);
  if (m <= 0.0) return out;
  std::vector<double> tilde(std::min(f.size(), n));
  for (std::size_t x = 0; x < tilde.size(); ++x) tilde[x] = static_cast<double>(x) * f[x] / m;
  const std::vector<double> conv = convolve(tilde, others_pmf.masses, n);
  for (std::size_t s = 0; s < n; ++s) out[s] = h * m * conv[s];
  return out;
}

namespace {

struct Accumulator {
  std::vector<double> fs;
  std::vector<std::vector<double>> mu;

  Accumulator(std::size_t n, std::size_t kmax) : fs(kmax, 0.0), mu(n, std::vector<double>(kmax, 0.0)) {}

  void add(const std::vector<std::size_t>& x, double p) {
    std::size_t s = 0;
    for (auto v : x) s += v;
    if (s >= fs.size()) return;
    fs[s] += p;
    for (std::size_t i = 0; i < x.size(); ++i) mu[i][s] += static_cast<double>(x[i]) * p;
  }
};

void check_budget(double outcomes, std::size_t budget, const std::string& what) {
  if (outcomes > static_cast<double>(budget))
    fail(ErrorCode::OracleBudget, what + ": " + std::to_string(outcomes) + " joint outcomes exceed budget " +
                                      std::to_string(budget));
}

AllocationTable enumerate_independent(const std::vector<RiskModel>& risks, std::size_t kmax, std::size_t budget,
                                      double h) {
  const std::size_t n = risks.size();
  std::vector<std::vector<std::size_t>> support(n);
  std::vector<std::vector<double>> prob(n);
  double outcomes = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = risk_pmf(risks[i], kmax);
    for (std::size_t x = 0; x < f.size(); ++x)
      if (f[x] > 0.0) {
        support[i].push_back(x);
        prob[i].push_back(f[x]);
      }
    outcomes *= static_cast<double>(support[i].size());
  }
  check_budget(outcomes, budget, "independent enumeration");

  Accumulator acc(n, kmax);
  std::vector<std::size_t> pos(n, 0), x(n);
  for (;;) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = support[i][pos[i]];
      p *= prob[i][pos[i]];
    }
    acc.add(x, p);
    std::size_t i = 0;
    while (i < n && ++pos[i] == support[i].size()) pos[i++] = 0;
    if (i == n) break;
  }
  std::vector<double> means(n);
  for (std::size_t i = 0; i < n; ++i) means[i] = risk_mean_index(risks[i]) * h;
  return make_table(std::move(acc.fs), std::move(acc.mu), h, std::move(means));
}

AllocationTable enumerate_frailty(const FrailtyBernoulliSpec& spec, std::size_t kmax, std::size_t budget) {
  const auto r = frailty_bases(spec);
  const std::size_t n = spec.risks.size();
  const std::size_t ts = frailty_theta_star(spec.alpha, spec.epsilon);
  check_budget(static_cast<double>(ts) * std::ldexp(1.0, static_cast<int>(n)), budget, "frailty enumeration");
  Accumulator acc(n, kmax);
  std::vector<std::size_t> x(n);
  for (std::size_t th = 1; th <= ts; ++th) {
    const double w = frailty_weight(spec.alpha, th);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = std::pow(r[i], static_cast<double>(th));
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      double pr = w;
      for (std::size_t i = 0; i < n; ++i) {
        const bool on = (mask >> i) & 1U;
        x[i] = on ? spec.risks[i].b : 0;
        pr *= on ? p[i] : 1.0 - p[i];
      }
      acc.add(x, pr);
    }
  }
  std::vector<double> means;
  for (const auto& risk : spec.risks) means.push_back(static_cast<double>(risk.b) * risk.q);
  return make_table(std::move(acc.fs), std::move(acc.mu), 1.0, std::move(means));
}

double nb_or_delta(double r, double q, std::size_t k) {
  if (r == 0.0) return k == 0 ? 1.0 : 0.0;
  return negbin_pmf(r, q, k);
}

// Latent representation: X1 = V1 + U, X2 = V2 + W - U with V1, V2, W
// independent negative binomials and U | W binomial.
AllocationTable enumerate_gamma(const GammaMixtureSpec& spec, std::size_t kmax, std::size_t budget) {
  spec.validate();
  const double k = static_cast<double>(kmax);
  check_budget(k * k * k * k / 24.0, budget, "gamma mixture enumeration");
  const double g = spec.gamma0;
  const double q1 = 1.0 / (1.0 + spec.zeta1());
  const double q2 = 1.0 / (1.0 + spec.zeta2());
  const double q12 = 1.0 / (1.0 + spec.zeta12());
  const double split = spec.zeta1() / spec.zeta12();
  Accumulator acc(2, kmax);
  std::vector<std::size_t> x(2);
  for (std::size_t v1 = 0; v1 < kmax; ++v1) {
    const double p1 = nb_or_delta(spec.r1 - g, q1, v1);
    if (p1 == 0.0) continue;
    for (std::size_t v2 = 0; v1 + v2 < kmax; ++v2) {
      const double p2 = nb_or_delta(spec.r2 - g, q2, v2);
      if (p2 == 0.0) continue;
      for (std::size_t w = 0; v1 + v2 + w < kmax; ++w) {
        const double pw = nb_or_delta(g, q12, w);
        if (pw == 0.0) continue;
        for (std::size_t u = 0; u <= w; ++u) {
          const double wd = static_cast<double>(w), ud = static_cast<double>(u);
          const double lb = std::lgamma(wd + 1.0) - std::lgamma(ud + 1.0) - std::lgamma(wd - ud + 1.0);
          double pb = std::exp(lb + (u ? ud * std::log(split) : 0.0) + (w - u ? (wd - ud) * std::log1p(-split) : 0.0));
          x[0] = v1 + u;
          x[1] = v2 + (w - u);
          acc.add(x, p1 * p2 * pw * pb);
        }
      }
    }
  }
  return make_table(std::move(acc.fs), std::move(acc.mu), 1.0, {spec.lambda1, spec.lambda2});
}

}  // namespace

AllocationTable oracle_enumerate(const PortfolioModel& model, std::size_t kmax, std::size_t budget) {
  if (!is_pow2(kmax)) fail(ErrorCode::InvalidSize, "kmax must be a power of two");
  if (const auto* f = std::get_if<FrailtyBernoulliSpec>(&model.dependence)) return enumerate_frailty(*f, kmax, budget);
  if (const auto* g = std::get_if<GammaMixtureSpec>(&model.dependence)) return enumerate_gamma(*g, kmax, budget);
  if (std::holds_alternative<HierarchicalShockSpec>(model.dependence))
    fail(ErrorCode::OracleBudget, "shock model: fifteen unbounded latent Poisson counts cannot be enumerated");
  if (model.risks.empty()) fail(ErrorCode::InvalidArgument, "empty portfolio");
  double h = 1.0;
  for (const auto& r : model.risks)
    if (auto s = risk_step(r)) h = *s;
  return enumerate_independent(model.risks, kmax, budget, h);
}

}  // namespace allocgen
