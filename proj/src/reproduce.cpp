#include <cmath>
#include <sstream>

#include "allocgen/error.hpp"
#include "allocgen/scenario.hpp"

namespace allocgen {

namespace {

std::string fmt(double v) { return format_double(v); }

void add(ReproductionReport& rep, std::string name, bool ok, std::string detail, std::string kind) {
  rep.checks.push_back({std::move(name), ok, std::move(detail), std::move(kind)});
}

double total_cond(const AllocationTable& t, std::size_t k) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.n_risks(); ++i) s += t.expected_allocation[i][k] / t.fs_raw[k];
  return s;
}

void identity_checks(ReproductionReport& rep, const AllocationTable& t) {
  const double e = t.max_identity_error();
  add(rep, "full allocation identity on valid points", e <= 1e-10, "max relative error " + fmt(e), "identity");
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

void small_pool(ReproductionReport& rep, const AllocationTable& t) {
  double worst = 0.0;
  std::size_t at = 0;
  for (std::size_t k = 0; k <= 37; ++k) {
    const double d = std::abs(total_cond(t, k) - static_cast<double>(k));
    if (d > worst) {
      worst = d;
      at = k;
    }
  }
  add(rep, "total conditional mean equals k for k = 0..37 within 1e-8", worst <= 1e-8,
      "max deviation " + fmt(worst) + " at k=" + std::to_string(at), "reference");
  const double t38 = total_cond(t, 38);
  add(rep, "total conditional mean at k=38 is 38.05 +/- 0.01", std::abs(t38 - 38.05) <= 0.01, "computed " + fmt(t38),
      "reference");
  const bool flagged = !t.valid_mask[43] && !t.valid_mask[63];
  add(rep, "k=43 and k=63 flagged invalid", flagged,
      "f_S(43)=" + fmt(t.fs_raw[43]) + " f_S(63)=" + fmt(t.fs_raw[63]), "reference");
  const bool below = t.fs_raw[43] <= t.underflow_floor && t.fs_raw[63] <= t.underflow_floor;
  add(rep, "f_S(43) and f_S(63) below the underflow floor", below, "floor " + fmt(t.underflow_floor), "reference");
  identity_checks(rep, t);
}

void large_pool(ReproductionReport& rep, const ScenarioConfig& c, const AllocationTable& t) {
  static const double lambda[8] = {0.161152, 0.031859, 0.027368, 0.238748, 0.115137, 0.470203, 0.146247, 0.011747};
  static const double q[8] = {0.489756, 0.423367, 0.455898, 0.451500, 0.486834, 0.440405, 0.440082, 0.481335};
  static const double r[8] = {2, 6, 1, 4, 6, 5, 3, 1};
  static const double ex[8] = {0.335788, 0.260354, 0.032662, 1.160162, 0.728190, 2.987289, 0.558214, 0.012658};
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double m = lambda[i] * r[i] * (1.0 - q[i]) / q[i];
    worst = std::max(worst, std::abs(m - ex[i]));
  }
  add(rep, "E[X_i] from the eight listed parameter rows", worst <= 5e-6, "max gap " + fmt(worst), "reference");
  if (t.n_risks() >= 1 && c.model.risks.size() >= 1) {
    const double s = t.expected_cumulative[0].back();
    add(rep, "sum_k mu_1(k) = 0.335788", std::abs(s - 0.335788) <= 5e-6, "computed " + fmt(s), "reference");
  }
  double valid_mass = 0.0, acc = 0.0;
  std::size_t lo = t.kmax(), hi = 0, invalid_inside = 0;
  for (std::size_t k = 0; k < t.kmax(); ++k) {
    if (t.valid_mask[k]) valid_mass += t.fs[k];
    const double before = acc;
    acc += t.fs[k];
    if (before < 5e-4 && acc >= 5e-4) lo = k;
    if (before < 1.0 - 5e-4 && acc >= 1.0 - 5e-4) hi = k;
  }
  for (std::size_t k = lo; k <= hi && k < t.kmax(); ++k)
    if (!t.valid_mask[k]) ++invalid_inside;
  add(rep, "validation curve linear over the central 99.9% band of S",
      lo <= hi && invalid_inside == 0 && valid_mass >= 0.999,
      "band " + std::to_string(lo) + ".." + std::to_string(hi) + ", " + std::to_string(invalid_inside) +
          " invalid inside, valid mass " + fmt(valid_mass),
      "property");
  identity_checks(rep, t);
}

void heavy_tail(ReproductionReport& rep, const ScenarioConfig& c, const AllocationTable& t) {
  static const double expected[3] = {9.201219, 9.908447, 9.988156};
  for (std::size_t i = 0; i < 3 && i < c.model.risks.size(); ++i) {
    const double m = t.risk_means[i];
    add(rep, "arithmetized mean of risk " + std::to_string(i + 1) + " is " + fmt(expected[i]),
        std::abs(m - expected[i]) <= 5e-3, "computed " + fmt(m), "reference");
  }
  identity_checks(rep, t);
  if (t.n_risks() >= 3) {
    std::vector<ConditionalMeanDistribution> d;
    for (std::size_t i = 0; i < 3; ++i) d.push_back(conditional_mean_distribution(t, i));
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = a + 1; b < 3; ++b) {
        const auto n = count_cdf_crossings(d[a], d[b]);
        add(rep, "cdfs of E[X_" + std::to_string(a + 1) + "|S] and E[X_" + std::to_string(b + 1) + "|S] cross once",
            n == 1, std::to_string(n) + " crossing(s)", "reference");
      }
  }
}

void bernoulli_pool(ReproductionReport& rep, const ScenarioConfig& c, const AllocationTable& t) {
  const AllocationTable o = oracle_enumerate(c.model, c.kmax);
  double worst = 0.0;
  for (std::size_t i = 0; i < t.n_risks(); ++i)
    worst = std::max(worst, max_abs_diff(t.expected_allocation[i], o.expected_allocation[i]));
  add(rep, "transform path equals enumeration of all outcomes", worst <= 1e-10, "max gap " + fmt(worst), "identity");

  std::vector<std::size_t> b;
  for (const auto& r : c.model.risks) b.push_back(std::get<ScaledBernoulliRisk>(r).b);
  const std::size_t n = b.size();
  std::vector<std::size_t> count(t.kmax(), 0), witness(t.kmax(), 0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1U) s += b[i];
    if (s < t.kmax()) {
      ++count[s];
      witness[s] = mask;
    }
  }
  double gap = 0.0;
  std::size_t singles = 0;
  for (std::size_t k = 0; k < t.kmax(); ++k) {
    if (count[k] != 1) continue;
    ++singles;
    for (std::size_t i = 0; i < n; ++i) {
      const double want = ((witness[k] >> i) & 1U) ? static_cast<double>(b[i]) : 0.0;
      gap = std::max(gap, std::abs(t.conditional_mean[i][k] - want));
    }
  }
  add(rep, "E[X_i|S=k] in {0, b_i} at single-outcome levels", gap <= 1e-9,
      std::to_string(singles) + " levels, max gap " + fmt(gap), "reference");
  bool impossible_masked = true;
  for (std::size_t k = 0; k < t.kmax(); ++k)
    if (count[k] == 0 && t.valid_mask[k]) impossible_masked = false;
  add(rep, "impossible totals are masked", impossible_masked, "", "property");
  identity_checks(rep, t);
}

void shock(ReproductionReport& rep, const ScenarioConfig& c, const AllocationTable& t) {
  const auto& spec = std::get<HierarchicalShockSpec>(c.model.dependence);
  const auto leaves = shock_leaves();
  double g0 = 0.0, g1 = 0.0, gm = 0.0;
  for (std::size_t m = 0; m < leaves.size(); ++m) {
    const auto& l = leaves[m];
    g0 = std::max(g0, std::abs(t.expected_allocation[m][0]));
    g1 = std::max(g1, std::abs(t.expected_allocation[m][1] - spec.leaf[l.i - 1][l.j - 1][l.k - 1] * t.fs_raw[0]));
    gm = std::max(gm, std::abs(t.expected_cumulative[m].back() - t.risk_means[m]));
  }
  add(rep, "E[X_ijk 1{S=0}] = 0", g0 <= 1e-15, "max " + fmt(g0), "reference");
  add(rep, "E[X_ijk 1{S=1}] = lambda_ijk f_S(0)", g1 <= 1e-15, "max gap " + fmt(g1), "reference");
  add(rep, "sum_m E[X_ijk 1{S=m}] = E[X_ijk]", gm <= 1e-9, "max gap " + fmt(gm), "identity");
  identity_checks(rep, t);
}

void gamma_mixture(ReproductionReport& rep, const ScenarioConfig& c, const AllocationTable& t) {
  const auto& spec = std::get<GammaMixtureSpec>(c.model.dependence);
  const auto conv = gamma_mixture_convolution(spec, c.kmax);
  const double g = std::max({max_abs_diff(conv.fs, t.fs_raw), max_abs_diff(conv.alloc1, t.expected_allocation[0]),
                             max_abs_diff(conv.alloc2, t.expected_allocation[1])});
  add(rep, "transform path equals the closed convolution", g <= 1e-11, "max gap " + fmt(g), "identity");
  const double s = t.expected_cumulative[0].back();
  add(rep, "sum_k alloc_1(k) = lambda_1", std::abs(s - spec.lambda1) <= 1e-9, "computed " + fmt(s), "identity");
  identity_checks(rep, t);
}

void frailty(ReproductionReport& rep, const ScenarioConfig& c, const AllocationTable& t) {
  const auto& spec = std::get<FrailtyBernoulliSpec>(c.model.dependence);
  const auto ts = frailty_theta_star(spec.alpha, spec.epsilon);
  rep.log.push_back("theta* = " + std::to_string(ts));
  if (spec.alpha == 0.5 && spec.epsilon == 1e-10)
    add(rep, "theta* = 34 at alpha 0.5, epsilon 1e-10", ts == 34, "theta* " + std::to_string(ts), "reference");
  double worst = 0.0;
  for (std::size_t i = 0; i < spec.risks.size(); ++i)
    worst = std::max(worst, std::abs(frailty_marginal(spec, i) - spec.risks[i].q));
  add(rep, "marginals reconstruct q_i", worst <= 1e-9, "max gap " + fmt(worst), "identity");
  if (spec.risks.size() <= 12) {
    const AllocationTable o = oracle_enumerate(c.model, c.kmax);
    double g = 0.0;
    for (std::size_t i = 0; i < t.n_risks(); ++i)
      g = std::max(g, max_abs_diff(t.expected_allocation[i], o.expected_allocation[i]));
    add(rep, "transform path equals enumeration over theta and outcomes", g <= 1e-10, "max gap " + fmt(g), "identity");
  }
  identity_checks(rep, t);
}

}  // namespace

bool ReproductionReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::vector<std::string> reproduction_cases() {
  return {"small_pool", "large_pool", "heavy_tail", "bernoulli_pool", "shock", "gamma_mixture", "frailty"};
}

ReproductionReport reproduce(const std::string& case_name, const std::filesystem::path& out_dir) {
  const auto cases = reproduction_cases();
  if (std::find(cases.begin(), cases.end(), case_name) == cases.end())
    fail(ErrorCode::UnknownCase, "unknown case '" + case_name + "'");
  const ScenarioConfig c = load_scenario(scenario_dir() / (case_name + ".yaml"));
  ScenarioResult res = run_scenario(c, out_dir);
  ReproductionReport rep;
  rep.case_name = case_name;
  rep.log = res.report;
  const AllocationTable& t = res.table;
  if (case_name == "small_pool") small_pool(rep, t);
  else if (case_name == "large_pool") large_pool(rep, c, t);
  else if (case_name == "heavy_tail") heavy_tail(rep, c, t);
  else if (case_name == "bernoulli_pool") bernoulli_pool(rep, c, t);
  else if (case_name == "shock") shock(rep, c, t);
  else if (case_name == "gamma_mixture") gamma_mixture(rep, c, t);
  else frailty(rep, c, t);
  for (const auto& rv : res.rvar) {
    if (!rv.error.empty()) continue;
    double s = 0.0;
    for (double v : rv.contributions) s += v;
    add(rep, "Euler contributions sum to RVaR(" + fmt(rv.levels.alpha1) + ", " + fmt(rv.levels.alpha2) + ")",
        std::abs(s - rv.value) <= 1e-9, "gap " + fmt(std::abs(s - rv.value)), "identity");
  }
  return rep;
}

}  // namespace allocgen
