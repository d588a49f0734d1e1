#include "allocgen/dependence.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "allocgen/error.hpp"
#include "allocgen/parallel.hpp"

namespace allocgen {

namespace {

// z_j^p on the kmax roots.
cplx root_pow(const ComplexBuffer& roots, std::size_t j, std::size_t p) {
  const std::size_t n = roots.size();
  return roots[(j * (p % n)) % n];
}

void require_nonneg(double v, const std::string& what) {
  if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidArgument, what + " must be a finite value >= 0");
}

}  // namespace

HierarchicalShockSpec HierarchicalShockSpec::from_labels(const std::map<std::string, double>& lambda_by_node) {
  HierarchicalShockSpec s;
  for (const auto& [label, v] : lambda_by_node) {
    if (label == "0") {
      s.lambda0 = v;
      continue;
    }
    if (label.empty() || label.size() > 3) fail(ErrorCode::UnknownNode, "unknown tree node '" + label + "'");
    unsigned idx[3] = {0, 0, 0};
    for (std::size_t p = 0; p < label.size(); ++p) {
      if (label[p] != '1' && label[p] != '2') fail(ErrorCode::UnknownNode, "unknown tree node '" + label + "'");
      idx[p] = static_cast<unsigned>(label[p] - '1');
    }
    if (label.size() == 1) s.branch[idx[0]] = v;
    if (label.size() == 2) s.sub[idx[0]][idx[1]] = v;
    if (label.size() == 3) s.leaf[idx[0]][idx[1]][idx[2]] = v;
  }
  s.validate();
  return s;
}

void HierarchicalShockSpec::validate() const {
  require_nonneg(lambda0, "lambda_0");
  for (int i = 0; i < 2; ++i) {
    require_nonneg(branch[i], "branch lambda");
    for (int j = 0; j < 2; ++j) {
      require_nonneg(sub[i][j], "sub-branch lambda");
      for (int k = 0; k < 2; ++k) require_nonneg(leaf[i][j][k], "leaf lambda");
    }
  }
}

double HierarchicalShockSpec::leaf_mean(unsigned i, unsigned j, unsigned k) const {
  return leaf[i - 1][j - 1][k - 1] + sub[i - 1][j - 1] + branch[i - 1] + lambda0;
}

std::vector<ShockLeaf> shock_leaves() {
  std::vector<ShockLeaf> out;
  for (unsigned i = 1; i <= 2; ++i)
    for (unsigned j = 1; j <= 2; ++j)
      for (unsigned k = 1; k <= 2; ++k) out.push_back({i, j, k});
  return out;
}

ComplexBuffer shock_fs_dft(const HierarchicalShockSpec& spec, std::size_t kmax) {
  spec.validate();
  const ComplexBuffer z = roots_of_unity(kmax);
  double l1 = 0.0, l2 = 0.0, l4 = 0.0;
  for (int i = 0; i < 2; ++i) {
    l4 += spec.branch[i];
    for (int j = 0; j < 2; ++j) {
      l2 += spec.sub[i][j];
      for (int k = 0; k < 2; ++k) l1 += spec.leaf[i][j][k];
    }
  }
  ComplexBuffer out(kmax);
  for (std::size_t j = 0; j < kmax; ++j) {
    const cplx e = l1 * (root_pow(z, j, 1) - 1.0) + l2 * (root_pow(z, j, 2) - 1.0) +
                   l4 * (root_pow(z, j, 4) - 1.0) + spec.lambda0 * (root_pow(z, j, 8) - 1.0);
    out[j] = std::exp(e);
  }
  return out;
}

std::vector<double> shock_allocation_ogf(const HierarchicalShockSpec& spec, ShockLeaf leaf,
                                         const ComplexBuffer& fs_dft) {
  auto ok = [](unsigned v) { return v == 1 || v == 2; };
  if (!ok(leaf.i) || !ok(leaf.j) || !ok(leaf.k))
    fail(ErrorCode::UnknownNode, "leaf (" + std::to_string(leaf.i) + "," + std::to_string(leaf.j) + "," +
                                     std::to_string(leaf.k) + ") is not in the tree");
  const std::size_t kmax = fs_dft.size();
  const ComplexBuffer z = roots_of_unity(kmax);
  const double a1 = spec.leaf[leaf.i - 1][leaf.j - 1][leaf.k - 1];
  const double a2 = spec.sub[leaf.i - 1][leaf.j - 1];
  const double a4 = spec.branch[leaf.i - 1];
  const double a8 = spec.lambda0;
  ComplexBuffer mu(kmax);
  for (std::size_t j = 0; j < kmax; ++j)
    mu[j] = (a1 * root_pow(z, j, 1) + a2 * root_pow(z, j, 2) + a4 * root_pow(z, j, 4) + a8 * root_pow(z, j, 8)) *
            fs_dft[j];
  return idft(mu);
}

AllocationTable shock_allocation(const HierarchicalShockSpec& spec, std::size_t kmax, const AllocationOptions& opts) {
  const ComplexBuffer fs = shock_fs_dft(spec, kmax);
  const auto leaves = shock_leaves();
  std::vector<std::vector<double>> alloc(leaves.size());
  std::vector<double> means(leaves.size());
  for (std::size_t m = 0; m < leaves.size(); ++m) {
    alloc[m] = shock_allocation_ogf(spec, leaves[m], fs);
    means[m] = spec.leaf_mean(leaves[m].i, leaves[m].j, leaves[m].k);
  }
  AllocationTable t = make_table(idft(fs), std::move(alloc), 1.0, std::move(means), opts);
  t.diagnostics.emplace_back("method", "shock_fft");
  return t;
}

void GammaMixtureSpec::validate() const {
  if (!(r1 > 0.0) || !(r2 > 0.0)) fail(ErrorCode::InvalidMixture, "shape parameters r1, r2 must be positive");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) fail(ErrorCode::InvalidMixture, "lambda1, lambda2 must be positive");
  if (!(gamma0 >= 0.0) || gamma0 > std::min(r1, r2))
    fail(ErrorCode::InvalidMixture, "gamma0=" + std::to_string(gamma0) + " outside [0, min(r1, r2)]");
}

AllocationTable gamma_mixture_allocation(const GammaMixtureSpec& spec, std::size_t kmax,
                                         const AllocationOptions& opts) {
  spec.validate();
  const ComplexBuffer z = roots_of_unity(kmax);
  const double z1 = spec.zeta1(), z2 = spec.zeta2(), z12 = spec.zeta12();
  const double g = spec.gamma0;
  ComplexBuffer fs(kmax);
  std::vector<ComplexBuffer> mu(2, ComplexBuffer(kmax));
  for (std::size_t j = 0; j < kmax; ++j) {
    const cplx t = z[j];
    const cplx d1 = 1.0 - z1 * (t - 1.0);
    const cplx d2 = 1.0 - z2 * (t - 1.0);
    const cplx d12 = 1.0 - z12 * (t - 1.0);
    const cplx ps = std::exp(-(spec.r1 - g) * std::log(d1) - (spec.r2 - g) * std::log(d2) - g * std::log(d12));
    fs[j] = ps;
    mu[0][j] = spec.lambda1 * t * ((1.0 - g / spec.r1) / d1 + (g / spec.r1) / d12) * ps;
    mu[1][j] = spec.lambda2 * t * ((1.0 - g / spec.r2) / d2 + (g / spec.r2) / d12) * ps;
  }
  AllocationTable t = table_from_transforms(fs, mu, 1.0, {spec.lambda1, spec.lambda2}, opts);
  t.diagnostics.emplace_back("method", "gamma_mixture_fft");
  return t;
}

namespace {

std::vector<double> nb_vector(double r, double zeta, std::size_t n) {
  std::vector<double> f(n, 0.0);
  if (r == 0.0) {
    f[0] = 1.0;
    return f;
  }
  const double q = 1.0 / (1.0 + zeta);
  for (std::size_t k = 0; k < n; ++k) f[k] = negbin_pmf(r, q, k);
  return f;
}

std::vector<double> geometric_weights(double zeta, std::size_t n) {
  std::vector<double> w(n);
  const double ratio = zeta / (1.0 + zeta);
  double v = 1.0 / (1.0 + zeta);
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = v;
    v *= ratio;
  }
  return w;
}

}  // namespace

GammaMixtureConvolution gamma_mixture_convolution(const GammaMixtureSpec& spec, std::size_t kmax) {
  spec.validate();
  const double g = spec.gamma0;
  GammaMixtureConvolution out;
  out.fs = convolve(convolve(nb_vector(spec.r1 - g, spec.zeta1(), kmax), nb_vector(spec.r2 - g, spec.zeta2(), kmax),
                             kmax),
                    nb_vector(g, spec.zeta12(), kmax), kmax);
  const auto g1 = geometric_weights(spec.zeta1(), kmax);
  const auto g2 = geometric_weights(spec.zeta2(), kmax);
  const auto g12 = geometric_weights(spec.zeta12(), kmax);
  out.alloc1.assign(kmax, 0.0);
  out.alloc2.assign(kmax, 0.0);
  for (std::size_t k = 1; k < kmax; ++k) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double f = out.fs[k - 1 - j];
      s1 += ((1.0 - g / spec.r1) * g1[j] + (g / spec.r1) * g12[j]) * f;
      s2 += ((1.0 - g / spec.r2) * g2[j] + (g / spec.r2) * g12[j]) * f;
    }
    out.alloc1[k] = spec.lambda1 * s1;
    out.alloc2[k] = spec.lambda2 * s2;
  }
  return out;
}

void FrailtyBernoulliSpec::validate() const {
  if (risks.empty()) fail(ErrorCode::InvalidArgument, "frailty pool has no risks");
  if (!(alpha >= 0.0) || !(alpha < 1.0)) fail(ErrorCode::InvalidFrailty, "alpha must lie in [0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(ErrorCode::InvalidFrailty, "epsilon must lie in (0, 1)");
  for (const auto& r : risks) {
    if (r.b == 0) fail(ErrorCode::InvalidArgument, "Bernoulli amount b must be positive");
    if (!(r.q > 0.0 && r.q < 1.0)) fail(ErrorCode::InvalidMarginal, "q must lie in (0, 1)");
  }
}

std::size_t frailty_theta_star(double alpha, double epsilon) {
  if (!(alpha >= 0.0) || !(alpha < 1.0)) fail(ErrorCode::InvalidFrailty, "alpha must lie in [0, 1)");
  if (alpha == 0.0) return 1;
  const double t = std::floor(std::log(epsilon) / std::log(alpha)) + 1.0;
  return static_cast<std::size_t>(std::max(2.0, t));
}

double frailty_weight(double alpha, std::size_t theta) {
  if (theta == 0) return 0.0;
  return (1.0 - alpha) * std::pow(alpha, static_cast<double>(theta - 1));
}

std::vector<double> frailty_bases(const FrailtyBernoulliSpec& spec) {
  spec.validate();
  std::vector<double> r;
  for (const auto& risk : spec.risks) r.push_back(std::exp(-std::log((1.0 - spec.alpha) / risk.q + spec.alpha)));
  return r;
}

double frailty_marginal(const FrailtyBernoulliSpec& spec, std::size_t risk) {
  const auto r = frailty_bases(spec);
  if (risk >= r.size()) fail(ErrorCode::InvalidArgument, "risk index out of range");
  const std::size_t ts = frailty_theta_star(spec.alpha, spec.epsilon);
  double s = 0.0;
  for (std::size_t th = 1; th <= ts; ++th) s += frailty_weight(spec.alpha, th) * std::pow(r[risk], static_cast<double>(th));
  return s;
}

FrailtyPgfs frailty_bernoulli_pgfs(const FrailtyBernoulliSpec& spec, std::size_t kmax) {
  spec.validate();
  std::size_t need = 1;
  for (const auto& r : spec.risks) need += r.b;
  if (kmax < need)
    fail(ErrorCode::InvalidSize, "kmax=" + std::to_string(kmax) + " below 1 + sum b_i = " + std::to_string(need));
  const std::size_t n = spec.risks.size();
  FrailtyPgfs out;
  out.bases = frailty_bases(spec);
  out.theta_star = frailty_theta_star(spec.alpha, spec.epsilon);
  out.fs_dft = ComplexBuffer(kmax);
  out.alloc_dfts.assign(n, ComplexBuffer(kmax));
  const ComplexBuffer z = roots_of_unity(kmax);

  double covered = 0.0;
  std::vector<ComplexBuffer> terms(n, ComplexBuffer(kmax));
  std::vector<ComplexBuffer> prefix(n + 1, ComplexBuffer(kmax)), suffix(n + 1, ComplexBuffer(kmax));
  for (std::size_t th = 1; th <= out.theta_star; ++th) {
    const double w = frailty_weight(spec.alpha, th);
    covered += w;
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = std::pow(out.bases[i], static_cast<double>(th));
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = 0; j < kmax; ++j) terms[i][j] = (1.0 - p[i]) + p[i] * root_pow(z, j, spec.risks[i].b);
    });
    for (std::size_t j = 0; j < kmax; ++j) {
      prefix[0][j] = 1.0;
      suffix[n][j] = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < kmax; ++j) prefix[i + 1][j] = prefix[i][j] * terms[i][j];
    for (std::size_t i = n; i-- > 0;)
      for (std::size_t j = 0; j < kmax; ++j) suffix[i][j] = suffix[i + 1][j] * terms[i][j];
    for (std::size_t j = 0; j < kmax; ++j) out.fs_dft[j] += w * prefix[n][j];
    parallel_for(n, [&](std::size_t i) {
      const double c = w * p[i] * static_cast<double>(spec.risks[i].b);
      for (std::size_t j = 0; j < kmax; ++j)
        out.alloc_dfts[i][j] += c * root_pow(z, j, spec.risks[i].b) * prefix[i][j] * suffix[i + 1][j];
    });
  }
  out.residual_mass = std::max(0.0, 1.0 - covered);
  return out;
}

AllocationTable frailty_allocation(const FrailtyBernoulliSpec& spec, std::size_t kmax, const AllocationOptions& opts) {
  const FrailtyPgfs pg = frailty_bernoulli_pgfs(spec, kmax);
  std::vector<double> means;
  for (const auto& r : spec.risks) means.push_back(static_cast<double>(r.b) * r.q);
  AllocationTable t = table_from_transforms(pg.fs_dft, pg.alloc_dfts, 1.0, std::move(means), opts);
  t.diagnostics.emplace_back("method", "frailty_fft");
  t.diagnostics.emplace_back("theta_star", std::to_string(pg.theta_star));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", pg.residual_mass);
  t.diagnostics.emplace_back("theta_residual_mass", buf);
  return t;
}

std::string dependence_name(const Dependence& d) {
  switch (d.index()) {
    case 0: return "independent";
    case 1: return "shock";
    case 2: return "gamma_mixture";
    default: return "frailty";
  }
}

std::size_t portfolio_size(const PortfolioModel& model) {
  switch (model.dependence.index()) {
    case 0: return model.risks.size();
    case 1: return 8;
    case 2: return 2;
    default: return std::get<FrailtyBernoulliSpec>(model.dependence).risks.size();
  }
}

AllocationTable allocate(const PortfolioModel& model, std::size_t kmax, const AllocationOptions& opts) {
  if (const auto* s = std::get_if<HierarchicalShockSpec>(&model.dependence)) return shock_allocation(*s, kmax, opts);
  if (const auto* g = std::get_if<GammaMixtureSpec>(&model.dependence)) return gamma_mixture_allocation(*g, kmax, opts);
  if (const auto* f = std::get_if<FrailtyBernoulliSpec>(&model.dependence)) return frailty_allocation(*f, kmax, opts);
  return allocate_independent(model.risks, kmax, opts);
}

}  // namespace allocgen
