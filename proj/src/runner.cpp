#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "allocgen/error.hpp"
#include "allocgen/scenario.hpp"

namespace allocgen {

namespace {

bool all_compound_poisson(const std::vector<RiskModel>& risks) {
  for (const auto& r : risks) {
    const auto* c = std::get_if<CompoundKatzRisk>(&r);
    if (!c || c->frequency.a != 0.0) return false;
  }
  return !risks.empty();
}

AllocationTable compute(const ScenarioConfig& c) {
  AllocationOptions opts{c.tolerance, c.underflow_floor};
  const bool independent = std::holds_alternative<Independent>(c.model.dependence);
  if (c.method == Method::algorithm1 && !independent)
    fail(ErrorCode::ConfigError, ".method: algorithm1 needs independent compound Poisson risks");
  const bool use_alg1 = independent && (c.method == Method::algorithm1 ||
                                        (c.method == Method::automatic && all_compound_poisson(c.model.risks)));
  if (use_alg1) {
    Algorithm1Options a;
    a.allocation = opts;
    a.force_streaming = c.force_streaming;
    return run_algorithm_1(c.model.risks, c.kmax, a);
  }
  return allocate(c.model, c.kmax, opts);
}

std::string fmt(double v) { return format_double(v); }

void write_allocations(const ScenarioConfig& c, const AllocationTable& t, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) fail(ErrorCode::ConfigError, "cannot write " + file.string());
  const std::size_t cols = c.outputs.max_risk_columns == 0 ? t.n_risks() : std::min(t.n_risks(), c.outputs.max_risk_columns);
  out << "k,f_S,F_S";
  for (std::size_t i = 1; i <= cols; ++i) out << ",mu_" << i << ",cum_" << i << ",cond_" << i;
  out << ",valid\n";
  const auto F = cdf(t.fs);
  for (std::size_t k = 0; k < t.kmax(); ++k) {
    out << k << ',' << fmt(t.fs[k]) << ',' << fmt(F[k]);
    for (std::size_t i = 0; i < cols; ++i)
      out << ',' << fmt(t.expected_allocation[i][k]) << ',' << fmt(t.expected_cumulative[i][k]) << ','
          << fmt(t.conditional_mean[i][k]);
    out << ',' << (t.valid_mask[k] ? 1 : 0) << '\n';
  }
}

void write_cond_mean_dist(const ConditionalMeanDistribution& d, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) fail(ErrorCode::ConfigError, "cannot write " + file.string());
  out << "value,mass,cum_mass\n";
  double cum = 0.0;
  for (std::size_t j = 0; j < d.support.size(); ++j) {
    cum += d.masses[j];
    out << fmt(d.support[j]) << ',' << fmt(d.masses[j]) << ',' << fmt(cum) << '\n';
  }
}

std::string valid_ranges(const AllocationTable& t) {
  std::ostringstream os;
  std::size_t shown = 0;
  for (std::size_t k = 0; k < t.kmax();) {
    if (!t.valid_mask[k]) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e + 1 < t.kmax() && t.valid_mask[e + 1]) ++e;
    if (shown++ < 8) os << (shown > 1 ? " " : "") << k << ".." << e;
    k = e + 1;
  }
  if (shown > 8) os << " (+" << (shown - 8) << " more runs)";
  return os.str();
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& c, const std::filesystem::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult res;
  res.table = compute(c);
  const AllocationTable& t = res.table;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto& r = res.report;
  r.push_back("scenario: " + c.name);
  r.push_back("dependence: " + dependence_name(c.model.dependence));
  r.push_back("risks: " + std::to_string(t.n_risks()));
  r.push_back("kmax: " + std::to_string(t.kmax()) + "  step_h: " + fmt(t.step_h));
  r.push_back("seed: " + std::to_string(c.seed));
  for (const auto& n : c.notes) r.push_back("note: " + n);
  for (const auto& [k, v] : t.diagnostics) r.push_back(k + ": " + v);
  r.push_back("tolerance: " + fmt(t.tolerance_used) + "  underflow_floor: " + fmt(t.underflow_floor));
  r.push_back("valid points: " + std::to_string(t.valid_count()) + " of " + std::to_string(t.kmax()) + " [" +
              valid_ranges(t) + "]");
  double valid_mass = 0.0;
  for (std::size_t k = 0; k < t.kmax(); ++k)
    if (t.valid_mask[k]) valid_mass += t.fs[k];
  r.push_back("probability mass on valid points: " + fmt(valid_mass));
  r.push_back("identity sum_i mu_i(k) = k h f_S(k), max relative error on valid points: " +
              fmt(t.max_identity_error()));
  double worst_mean = 0.0;
  for (std::size_t i = 0; i < t.n_risks(); ++i)
    worst_mean = std::max(worst_mean, std::abs(t.expected_cumulative[i].back() - t.risk_means[i]));
  r.push_back("identity sum_k mu_i(k) = E[X_i], max abs gap: " + fmt(worst_mean));
  r.push_back("truncation: lost_mass " + fmt(t.truncation.lost_mass) + "  lost_mean " + fmt(t.truncation.lost_mean));
  for (const auto& w : t.warnings) r.push_back("warning: " + w);

  for (const auto& lv : c.outputs.rvar) {
    RVaRResult rr;
    rr.levels = lv;
    try {
      rr.value = rvar(t.fs, lv);
      rr.contributions = euler_rvar_contributions(t, lv);
      double s = 0.0;
      for (double v : rr.contributions) s += v;
      r.push_back("RVaR(" + fmt(lv.alpha1) + ", " + fmt(lv.alpha2) + ") = " + fmt(rr.value) +
                  "  sum of Euler contributions = " + fmt(s) + "  gap " + fmt(std::abs(s - rr.value)));
    } catch (const Error& e) {
      rr.error = e.what();
      r.push_back("RVaR(" + fmt(lv.alpha1) + ", " + fmt(lv.alpha2) + "): " + rr.error);
    }
    res.rvar.push_back(std::move(rr));
  }
  const std::size_t cols =
      c.outputs.max_risk_columns == 0 ? t.n_risks() : std::min(t.n_risks(), c.outputs.max_risk_columns);
  for (const auto& [l1, l2] : c.outputs.layers) {
    for (std::size_t i = 0; i < cols; ++i) {
      const auto s = cumulative_and_layers(t, l1, l2, i);
      r.push_back("layers [" + std::to_string(l1) + ", " + std::to_string(l2) + "] risk " + std::to_string(i + 1) +
                  ": retained " + fmt(s.retained) + "  layer " + fmt(s.layer) + "  excess " + fmt(s.excess));
    }
  }
  r.push_back("elapsed seconds: " + fmt(std::round(res.seconds * 1000.0) / 1000.0));

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    if (c.outputs.allocations) write_allocations(c, t, out_dir / "allocations.csv");
    std::vector<std::size_t> dists = c.outputs.cond_mean_dist_risks;
    if (c.outputs.all_cond_mean_dists)
      for (std::size_t i = 1; i <= t.n_risks(); ++i) dists.push_back(i);
    for (auto i : dists)
      write_cond_mean_dist(conditional_mean_distribution(t, i - 1),
                           out_dir / ("cond_mean_dist_" + std::to_string(i) + ".csv"));
    std::ofstream rep(out_dir / "report.txt");
    for (const auto& line : r) {
      if (line.rfind("elapsed seconds", 0) == 0) continue;
      rep << line << '\n';
    }
  }
  return res;
}

}  // namespace allocgen
