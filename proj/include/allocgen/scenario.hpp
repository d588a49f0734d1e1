#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "allocgen/allocation.hpp"
#include "allocgen/dependence.hpp"
#include "allocgen/risk_measures.hpp"

namespace allocgen {

enum class Method { automatic, fft, algorithm1 };

struct OutputSpec {
  bool allocations = true;
  bool all_cond_mean_dists = false;
  /// One-based risk indices.
  std::vector<std::size_t> cond_mean_dist_risks;
  std::vector<RVaRLevels> rvar;
  std::vector<std::pair<std::size_t, std::size_t>> layers;
  /// Per-risk column groups written to allocations.csv; 0 writes all.
  std::size_t max_risk_columns = 0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  PortfolioModel model;
  std::size_t kmax = 0;
  double tolerance = kDefaultTolerance;
  double underflow_floor = kDefaultUnderflowFloor;
  std::uint64_t seed = 1;
  Method method = Method::automatic;
  bool force_streaming = false;
  OutputSpec outputs;
  /// Generator and parameter notes carried into report headers.
  std::vector<std::string> notes;
};

struct ScenarioOverrides {
  std::optional<std::size_t> kmax;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
};

ScenarioConfig parse_scenario(const std::string& yaml_text, const ScenarioOverrides& overrides = {});
ScenarioConfig load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides = {});
/// Directory holding the shipped scenario files.
std::filesystem::path scenario_dir();

/// Pr(E[X_i | S] = v) over the valid lattice points. Values within 1e-12 relative are merged.
struct ConditionalMeanDistribution {
  std::vector<double> support;
  std::vector<double> masses;
};

ConditionalMeanDistribution conditional_mean_distribution(const AllocationTable& table, std::size_t risk);

/// Sign changes of G_a - G_b over the union of both supports, ignoring |G_a - G_b| <= eps.
std::size_t count_cdf_crossings(const ConditionalMeanDistribution& a, const ConditionalMeanDistribution& b,
                                double eps = 1e-12);

struct RVaRResult {
  RVaRLevels levels;
  double value = 0.0;
  std::vector<double> contributions;
  std::string error;
};

struct ScenarioResult {
  AllocationTable table;
  std::vector<RVaRResult> rvar;
  std::vector<std::string> report;
  double seconds = 0.0;
};

/// Runs the pipeline; writes allocations.csv, cond_mean_dist_<i>.csv and
/// report.txt into `out_dir` unless it is empty.
ScenarioResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir = {});

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  /// "reference" for a stored expected value, "identity" or "property" otherwise.
  std::string kind;
};

struct ReproductionReport {
  std::string case_name;
  std::vector<CheckResult> checks;
  std::vector<std::string> log;
  bool passed() const;
};

std::vector<std::string> reproduction_cases();
ReproductionReport reproduce(const std::string& case_name, const std::filesystem::path& out_dir = {});

/// Seeded parameter generators. Uniforms come from mt19937_64 as (x >> 11) * 2^-53.
struct LargePoolParams {
  double lambda;
  double r;
  double q;
};
std::vector<LargePoolParams> sample_large_pool(std::size_t count, std::uint64_t seed);
/// Negative binomial severity on `points` points with the remaining mass on the last point.
/// Trailing points that underflow to zero are dropped.
DiscretePMF negbin_severity(double r, double q, std::size_t points);

struct ParetoParams {
  double alpha;
  double lambda;
};
std::vector<ParetoParams> sample_pareto(std::size_t count, std::uint64_t seed);
/// Lomax cdf and limited expected value, then arithmetized on `points` lattice points.
std::pair<DiscretePMF, TruncationReport> arithmetized_pareto(double alpha, double lambda, std::size_t points,
                                                             Discretization method = Discretization::moment_matching);

std::vector<ScaledBernoulliRisk> sample_bernoulli(std::size_t count, std::uint64_t seed);

}  // namespace allocgen
