#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "allocgen/gf.hpp"
#include "allocgen/pmf.hpp"
#include "allocgen/risk.hpp"

namespace allocgen {

inline constexpr double kDefaultTolerance = 1e-8;
inline constexpr double kDefaultUnderflowFloor = 1e-15;

/// Per-risk E[X_i 1{S=k}], E[X_i 1{S<=k}] and E[X_i | S=k] on the lattice of S.
/// Allocations are in monetary units (lattice index times step_h).
struct AllocationTable {
  double step_h = 1.0;
  DiscretePMF fs;
  /// f_S exactly as returned by the inverse transform, before clamping.
  std::vector<double> fs_raw;
  std::vector<std::vector<double>> expected_allocation;
  std::vector<std::vector<double>> expected_cumulative;
  /// NaN where f_S is at or below the underflow floor.
  std::vector<std::vector<double>> conditional_mean;
  std::vector<std::uint8_t> valid_mask;
  /// E[X_i] of each model risk, monetary units.
  std::vector<double> risk_means;
  double tolerance_used = kDefaultTolerance;
  double underflow_floor = kDefaultUnderflowFloor;
  TruncationReport truncation;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, std::string>> diagnostics;

  std::size_t kmax() const noexcept { return fs_raw.size(); }
  std::size_t n_risks() const noexcept { return expected_allocation.size(); }
  std::size_t valid_count() const;
  /// Largest |sum_i mu_i(k) - k h f_S(k)| / (1 + k h f_S(k)) over valid k.
  double max_identity_error() const;
};

struct AllocationOptions {
  double tolerance = kDefaultTolerance;
  double underflow_floor = kDefaultUnderflowFloor;
};

/// Assembles a table from f_S and per-risk allocation vectors in lattice units.
AllocationTable make_table(std::vector<double> fs_raw, std::vector<std::vector<double>> alloc_index,
                           double step_h, std::vector<double> risk_means, const AllocationOptions& opts = {});

/// Inverts f_S and the allocation transforms, then assembles the table.
AllocationTable table_from_transforms(const ComplexBuffer& fs_dft, const std::vector<ComplexBuffer>& alloc_dfts,
                                      double step_h, std::vector<double> risk_means,
                                      const AllocationOptions& opts = {});

/// Recomputes conditional means and the validity mask.
AllocationTable mask_validity(AllocationTable table, double tol = kDefaultTolerance,
                              double underflow_floor = kDefaultUnderflowFloor);

AllocationTable allocate_independent(const std::vector<RiskModel>& portfolio, std::size_t kmax,
                                     const AllocationOptions& opts = {});

struct KatzAllocation {
  std::vector<double> expected_allocation;
  std::vector<double> expected_cumulative;
};

/// Closed form for a Katz risk X_1, given the pmf of the full sum S.
KatzAllocation allocate_katz_closed_form(const KatzParams& katz, const DiscretePMF& fs);

struct NegBinRisk {
  double r;
  double q;
};

struct SeriesResult {
  double value = 0.0;
  std::size_t terms = 0;
  /// Bound on the omitted remainder.
  double tail_bound = 0.0;
};

/// E[X_1 1{S=k}] for independent negative binomial risks by the mixture series.
SeriesResult allocate_negbin_convolution(const std::vector<NegBinRisk>& portfolio, std::size_t k,
                                         std::size_t l_max = 100000);

struct CompoundKatzAllocation {
  std::vector<double> expected_allocation;
  bool used_composition_form = false;
};

/// E[X_1 1{S=k}] for a compound Katz X_1 independent of S_{-1}, whose pgf on
/// the roots is `fs_others_dft`. Lattice units.
CompoundKatzAllocation allocate_compound_katz(const CompoundKatzRisk& risk, const ComplexBuffer& fs_others_dft,
                                              std::size_t kmax);

struct Algorithm1Options {
  AllocationOptions allocation;
  /// Cache per-risk derivative transforms while they fit in this many bytes.
  std::size_t memory_budget_bytes = std::size_t{3} << 29;
  bool force_streaming = false;
};

/// Independent compound Poisson risks.
AllocationTable run_algorithm_1(const std::vector<RiskModel>& portfolio, std::size_t kmax,
                                const Algorithm1Options& opts = {});

struct LayerSplit {
  double retained = 0.0;
  double layer = 0.0;
  double excess = 0.0;
};

/// Split of E[X_i] at S <= l1, l1 < S <= l2, S > l2 (lattice indices).
LayerSplit cumulative_and_layers(const AllocationTable& table, std::size_t l1, std::size_t l2, std::size_t risk);

/// Size-biased route: E[X_1] Pr(X~_1 + S_{-1} = s) by direct convolution.
std::vector<double> oracle_size_biased(const RiskModel& risk, const DiscretePMF& others_pmf);

}  // namespace allocgen
