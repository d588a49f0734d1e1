#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "allocgen/allocation.hpp"
#include "allocgen/gf.hpp"
#include "allocgen/risk.hpp"

namespace allocgen {

/// X_ijk = Y_ijk + Y_ij + Y_i + Y_0 over the full binary tree of depth 3,
/// every Y Poisson. Indices below are zero-based storage of labels 1 and 2.
struct HierarchicalShockSpec {
  double lambda0 = 0.0;
  std::array<double, 2> branch{};
  std::array<std::array<double, 2>, 2> sub{};
  std::array<std::array<std::array<double, 2>, 2>, 2> leaf{};

  /// Labels: "0" for the root, then "1", "12", "121" style paths of 1s and 2s.
  static HierarchicalShockSpec from_labels(const std::map<std::string, double>& lambda_by_node);
  void validate() const;
  double leaf_mean(unsigned i, unsigned j, unsigned k) const;
};

/// One-based leaf label (i, j, k), each in {1, 2}.
struct ShockLeaf {
  unsigned i = 1, j = 1, k = 1;
};

/// Leaves in the order 111, 112, 121, 122, 211, 212, 221, 222.
std::vector<ShockLeaf> shock_leaves();

ComplexBuffer shock_fs_dft(const HierarchicalShockSpec& spec, std::size_t kmax);
/// E[X_ijk 1{S=m}] for m < kmax.
std::vector<double> shock_allocation_ogf(const HierarchicalShockSpec& spec, ShockLeaf leaf,
                                         const ComplexBuffer& fs_dft);
AllocationTable shock_allocation(const HierarchicalShockSpec& spec, std::size_t kmax,
                                 const AllocationOptions& opts = {});

/// Two Poisson risks mixed by a bivariate gamma common shock.
struct GammaMixtureSpec {
  double gamma0 = 0.0;
  double r1 = 1.0;
  double r2 = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  void validate() const;
  double zeta1() const { return lambda1 / r1; }
  double zeta2() const { return lambda2 / r2; }
  double zeta12() const { return zeta1() + zeta2(); }
};

AllocationTable gamma_mixture_allocation(const GammaMixtureSpec& spec, std::size_t kmax,
                                         const AllocationOptions& opts = {});

struct GammaMixtureConvolution {
  std::vector<double> fs;
  std::vector<double> alloc1;
  std::vector<double> alloc2;
};

/// Same quantities by direct convolution of negative binomial and geometric pmfs.
GammaMixtureConvolution gamma_mixture_convolution(const GammaMixtureSpec& spec, std::size_t kmax);

/// Bernoulli risks b_i * I_i made dependent by a shifted geometric frailty
/// (Ali-Mikhail-Haq copula).
struct FrailtyBernoulliSpec {
  std::vector<ScaledBernoulliRisk> risks;
  double alpha = 0.0;
  double epsilon = 1e-10;

  void validate() const;
};

std::size_t frailty_theta_star(double alpha, double epsilon);
/// Pr(Theta = theta) = (1 - alpha) alpha^(theta - 1).
double frailty_weight(double alpha, std::size_t theta);
/// Conditional success bases r_i with Pr(I_i = 1 | Theta = theta) = r_i^theta.
std::vector<double> frailty_bases(const FrailtyBernoulliSpec& spec);
/// Sum over the truncated mixture of Pr(Theta = theta) r_i^theta.
double frailty_marginal(const FrailtyBernoulliSpec& spec, std::size_t risk);

struct FrailtyPgfs {
  ComplexBuffer fs_dft;
  std::vector<ComplexBuffer> alloc_dfts;
  std::size_t theta_star = 0;
  /// Mixing mass beyond theta_star, left out rather than renormalized.
  double residual_mass = 0.0;
  std::vector<double> bases;
};

FrailtyPgfs frailty_bernoulli_pgfs(const FrailtyBernoulliSpec& spec, std::size_t kmax);
AllocationTable frailty_allocation(const FrailtyBernoulliSpec& spec, std::size_t kmax,
                                   const AllocationOptions& opts = {});

struct Independent {};

using Dependence = std::variant<Independent, HierarchicalShockSpec, GammaMixtureSpec, FrailtyBernoulliSpec>;

/// For dependent regimes the risks are defined by the regime itself and
/// `risks` is ignored.
struct PortfolioModel {
  std::vector<RiskModel> risks;
  Dependence dependence = Independent{};
};

std::string dependence_name(const Dependence& d);
std::size_t portfolio_size(const PortfolioModel& model);

AllocationTable allocate(const PortfolioModel& model, std::size_t kmax, const AllocationOptions& opts = {});

/// Direct summation over the joint pmf; throws OracleBudget past `budget` outcomes.
AllocationTable oracle_enumerate(const PortfolioModel& model, std::size_t kmax,
                                 std::size_t budget = 10'000'000);

}  // namespace allocgen
