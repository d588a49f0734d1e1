#pragma once

#include <cstddef>
#include <vector>

#include "allocgen/allocation.hpp"
#include "allocgen/pmf.hpp"

namespace allocgen {

struct RVaRLevels {
  double alpha1 = 0.0;
  double alpha2 = 1.0;

  void validate() const;
};

/// Smallest lattice index k with F_S(k) >= kappa.
std::size_t var_index(const DiscretePMF& fs, double kappa);
/// var_index times the lattice step.
double var_level(const DiscretePMF& fs, double kappa);
double tvar(const DiscretePMF& fs, double kappa);
double rvar(const DiscretePMF& fs, const RVaRLevels& levels);

/// Euler split of RVaR(S) onto the risks of the table.
std::vector<double> euler_rvar_contributions(const AllocationTable& table, const RVaRLevels& levels);

}  // namespace allocgen
