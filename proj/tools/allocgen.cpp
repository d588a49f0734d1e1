#include <CLI11.hpp>

#include <iostream>

#include "allocgen/error.hpp"
#include "allocgen/scenario.hpp"

using namespace allocgen;

namespace {

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownCase:
      return 2;
    default:
      return 3;
  }
}

double max_gap(const AllocationTable& a, const AllocationTable& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.n_risks(); ++i)
    for (std::size_t k = 0; k < a.kmax(); ++k)
      m = std::max(m, std::abs(a.expected_allocation[i][k] - b.expected_allocation[i][k]));
  return m;
}

int run_oracle(const ScenarioConfig& c) {
  const AllocationTable t = allocate(c.model, c.kmax, {c.tolerance, c.underflow_floor});
  const AllocationTable o = oracle_enumerate(c.model, c.kmax);
  const double ge = max_gap(t, o);
  std::cout << "enumeration vs transform: max |gap| " << format_double(ge) << '\n';
  bool ok = ge <= 1e-10;
  if (std::holds_alternative<Independent>(c.model.dependence)) {
    for (std::size_t i = 0; i < c.model.risks.size(); ++i) {
      std::vector<RiskModel> others = c.model.risks;
      others.erase(others.begin() + static_cast<std::ptrdiff_t>(i));
      DiscretePMF fo;
      fo.step_h = t.step_h;
      if (others.empty()) {
        fo.masses.assign(c.kmax, 0.0);
        fo.masses[0] = 1.0;
      } else {
        fo = oracle_enumerate({others, Independent{}}, c.kmax).fs;
      }
      const auto sb = oracle_size_biased(c.model.risks[i], fo);
      double g = 0.0;
      for (std::size_t k = 0; k < c.kmax; ++k) g = std::max(g, std::abs(sb[k] - t.expected_allocation[i][k]));
      std::cout << "size-biased vs transform, risk " << i + 1 << ": max |gap| " << format_double(g) << '\n';
      ok = ok && g <= 1e-10;
    }
  }
  std::cout << (ok ? "oracle check passed" : "oracle check FAILED") << '\n';
  return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected allocations and conditional mean risk sharing for lattice portfolios"};
  app.require_subcommand(1);

  std::string file, out_dir = "allocgen_out", case_name;
  ScenarioOverrides ov;
  std::size_t kmax = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "run a scenario file and write CSV outputs");
  run->add_option("file", file, "scenario file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--kmax", kmax, "override kmax (power of two)");
  run->add_option("--tol", tol, "override validity tolerance");
  run->add_option("--seed", seed, "override generator seed");

  auto* rep = app.add_subcommand("reproduce", "run a canonical application and check stored values");
  rep->add_option("case", case_name, "small_pool|large_pool|heavy_tail|bernoulli_pool|shock|gamma_mixture|frailty")
      ->required();
  rep->add_option("--out", out_dir, "output directory");

  auto* orc = app.add_subcommand("oracle", "cross-check a small scenario against brute-force oracles");
  orc->add_option("file", file, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (run->count("--kmax")) ov.kmax = kmax;
      if (run->count("--tol")) ov.tolerance = tol;
      if (run->count("--seed")) ov.seed = seed;
      const ScenarioConfig c = load_scenario(file, ov);
      const ScenarioResult r = run_scenario(c, out_dir);
      for (const auto& line : r.report) std::cout << line << '\n';
      return 0;
    }
    if (*rep) {
      const ReproductionReport r = reproduce(case_name, rep->count("--out") ? out_dir : std::string());
      for (const auto& line : r.log) std::cout << line << '\n';
      for (const auto& c : r.checks)
        std::cout << (c.passed ? "PASS" : "FAIL") << " [" << c.kind << "] " << c.name
                  << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
      return r.passed() ? 0 : 4;
    }
    if (*orc) return run_oracle(load_scenario(file));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
