#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace allocgen {

/// Probability mass function on the lattice h*{0, 1, ..., kmax-1}.
struct DiscretePMF {
  std::vector<double> masses;
  double step_h = 1.0;
  /// Mass known to lie beyond the last lattice point.
  double truncation_mass = 0.0;
  /// Total of the small negative values zeroed at construction.
  double clamped_mass = 0.0;

  std::size_t size() const noexcept { return masses.size(); }
  double operator[](std::size_t k) const { return masses[k]; }
  double total() const;
};

struct TruncationReport {
  std::size_t kmax = 0;
  double lost_mass = 0.0;
  double lost_mean = 0.0;
};

enum class Discretization { upper, lower, moment_matching };

using RealFn = std::function<double(double)>;

inline constexpr double kNegativeTolerance = 1e-12;

DiscretePMF pmf_from_values(std::vector<double> values, double step_h = 1.0);

double mean(const DiscretePMF& pmf);
std::vector<double> cdf(const DiscretePMF& pmf);

/// Lattice version of a continuous severity on [0, inf). `lev` is the limited
/// expected value x -> E[min(X, x)], required for moment matching.
/// `true_mean`, when known, sharpens the lost_mean figure of the report;
/// otherwise lost_mean is the lower bound x_last * lost_mass.
std::pair<DiscretePMF, TruncationReport> arithmetize(const RealFn& cdf_fn, const RealFn& lev_fn,
                                                     Discretization method, std::size_t kmax,
                                                     double step_h = 1.0,
                                                     std::optional<double> true_mean = std::nullopt);

bool is_pow2(std::size_t n) noexcept;
std::size_t next_pow2(std::size_t n);

/// Zero-pads (or checks) the pmf to length n. Throws InvalidSize if it would truncate mass.
DiscretePMF padded(const DiscretePMF& pmf, std::size_t n);

/// Clamps inverse-transform round-off in [-1e-12, 0) to zero. Throws InvalidPMF below that.
std::vector<double> clamp_roundoff(std::vector<double> values, double* clamped = nullptr);

/// Direct O(n*m) convolution truncated to `len` entries (len = 0 keeps full length).
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b,
                             std::size_t len = 0);

}  // namespace allocgen
