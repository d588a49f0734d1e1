#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "allocgen/gf.hpp"
#include "allocgen/katz.hpp"
#include "allocgen/pmf.hpp"

namespace allocgen {

struct ExplicitRisk {
  DiscretePMF pmf;
};

struct KatzRisk {
  KatzParams katz;
};

/// Random sum of `frequency` iid severities; a = 0 is compound Poisson.
struct CompoundKatzRisk {
  KatzParams frequency;
  DiscretePMF severity;
};

/// X = b * Bernoulli(q).
struct ScaledBernoulliRisk {
  std::size_t b = 1;
  double q = 0.5;
};

using RiskModel = std::variant<ExplicitRisk, KatzRisk, CompoundKatzRisk, ScaledBernoulliRisk>;

RiskModel compound_poisson(double lambda, DiscretePMF severity);

void validate(const RiskModel& risk);
std::string describe(const RiskModel& risk);

/// Mean in lattice units (multiply by h for monetary units).
double risk_mean_index(const RiskModel& risk);
/// Largest index with positive mass, or nullopt for unbounded support.
std::optional<std::size_t> risk_max_support(const RiskModel& risk);
/// Lattice step of an explicit pmf, nullopt for parametric risks.
std::optional<double> risk_step(const RiskModel& risk);

/// First kmax masses (compound risks by inversion on kmax roots).
std::vector<double> risk_pmf(const RiskModel& risk, std::size_t kmax);
/// pgf of the risk on the kmax roots of unity.
ComplexBuffer risk_pgf_on_roots(const RiskModel& risk, std::size_t kmax);
/// z P'(z) on the roots, i.e. the transform of {k f(k)}.
ComplexBuffer risk_phi_on_roots(const RiskModel& risk, std::size_t kmax);

}  // namespace allocgen
