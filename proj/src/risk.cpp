#include "allocgen/risk.hpp"

#include <cmath>
#include <sstream>

#include "allocgen/error.hpp"

namespace allocgen {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t last_nonzero(const std::vector<double>& v) {
  std::size_t last = 0;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k] != 0.0) last = k;
  return last;
}

std::vector<double> weighted_by_index(const std::vector<double>& f) {
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = static_cast<double>(k) * f[k];
  return out;
}

// Root power z_j^b for the kmax-th roots.
ComplexBuffer root_power(const ComplexBuffer& roots, std::size_t b) {
  const std::size_t n = roots.size();
  ComplexBuffer out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = roots[(j * (b % n)) % n];
  return out;
}

const std::vector<double>& checked_masses(const DiscretePMF& pmf, std::size_t kmax) {
  if (pmf.masses.size() > kmax) {
    for (std::size_t k = kmax; k < pmf.masses.size(); ++k)
      if (pmf.masses[k] != 0.0)
        fail(ErrorCode::InvalidSize, "pmf support exceeds kmax=" + std::to_string(kmax));
  }
  return pmf.masses;
}

}  // namespace

RiskModel compound_poisson(double lambda, DiscretePMF severity) {
  return CompoundKatzRisk{KatzParams::poisson(lambda), std::move(severity)};
}

void validate(const RiskModel& risk) {
  std::visit(overloaded{
                 [](const ExplicitRisk& r) {
                   if (r.pmf.masses.empty()) fail(ErrorCode::InvalidPMF, "empty pmf");
                 },
                 [](const KatzRisk& r) { r.katz.validate(); },
                 [](const CompoundKatzRisk& r) {
                   r.frequency.validate();
                   if (r.severity.masses.empty()) fail(ErrorCode::InvalidPMF, "empty severity pmf");
                 },
                 [](const ScaledBernoulliRisk& r) {
                   if (r.b == 0) fail(ErrorCode::InvalidArgument, "Bernoulli amount b must be positive");
                   if (!(r.q > 0.0 && r.q < 1.0)) fail(ErrorCode::InvalidMarginal, "q must lie in (0,1)");
                 },
             },
             risk);
}

std::string describe(const RiskModel& risk) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const ExplicitRisk& r) { os << "explicit(" << r.pmf.size() << " points)"; },
                 [&](const KatzRisk& r) { os << "katz(a=" << r.katz.a << ", b=" << r.katz.b << ")"; },
                 [&](const CompoundKatzRisk& r) {
                   os << "compound_katz(a=" << r.frequency.a << ", b=" << r.frequency.b << ", severity "
                      << r.severity.size() << " points)";
                 },
                 [&](const ScaledBernoulliRisk& r) { os << "bernoulli(b=" << r.b << ", q=" << r.q << ")"; },
             },
             risk);
  return os.str();
}

double risk_mean_index(const RiskModel& risk) {
  return std::visit(overloaded{
                        [](const ExplicitRisk& r) { return mean(r.pmf) / r.pmf.step_h; },
                        [](const KatzRisk& r) { return r.katz.mean(); },
                        [](const CompoundKatzRisk& r) {
                          return r.frequency.mean() * mean(r.severity) / r.severity.step_h;
                        },
                        [](const ScaledBernoulliRisk& r) { return static_cast<double>(r.b) * r.q; },
                    },
                    risk);
}

std::optional<std::size_t> risk_max_support(const RiskModel& risk) {
  return std::visit(overloaded{
                        [](const ExplicitRisk& r) -> std::optional<std::size_t> {
                          if (r.pmf.truncation_mass > 0.0) return std::nullopt;
                          return last_nonzero(r.pmf.masses);
                        },
                        [](const KatzRisk& r) -> std::optional<std::size_t> {
                          if (r.katz.a < 0.0) return static_cast<std::size_t>(std::llround(-r.katz.b / r.katz.a - 1.0));
                          if (r.katz.b == 0.0 && r.katz.a == 0.0) return 0;
                          return std::nullopt;
                        },
                        [](const CompoundKatzRisk& r) -> std::optional<std::size_t> {
                          if (r.frequency.a == 0.0 && r.frequency.b == 0.0) return 0;
                          if (last_nonzero(r.severity.masses) == 0) return 0;
                          return std::nullopt;
                        },
                        [](const ScaledBernoulliRisk& r) -> std::optional<std::size_t> { return r.b; },
                    },
                    risk);
}

std::optional<double> risk_step(const RiskModel& risk) {
  if (const auto* e = std::get_if<ExplicitRisk>(&risk)) return e->pmf.step_h;
  if (const auto* c = std::get_if<CompoundKatzRisk>(&risk)) return c->severity.step_h;
  return std::nullopt;
}

std::vector<double> risk_pmf(const RiskModel& risk, std::size_t kmax) {
  return std::visit(overloaded{
                        [&](const ExplicitRisk& r) {
                          std::vector<double> f = checked_masses(r.pmf, kmax);
                          f.resize(kmax, 0.0);
                          return f;
                        },
                        [&](const KatzRisk& r) { return r.katz.pmf(kmax); },
                        [&](const CompoundKatzRisk&) {
                          return clamp_roundoff(idft(risk_pgf_on_roots(risk, kmax)));
                        },
                        [&](const ScaledBernoulliRisk& r) {
                          if (r.b >= kmax) fail(ErrorCode::InvalidSize, "Bernoulli amount exceeds kmax");
                          std::vector<double> f(kmax, 0.0);
                          f[0] = 1.0 - r.q;
                          f[r.b] = r.q;
                          return f;
                        },
                    },
                    risk);
}

ComplexBuffer risk_pgf_on_roots(const RiskModel& risk, std::size_t kmax) {
  return std::visit(overloaded{
                        [&](const ExplicitRisk& r) { return dft(checked_masses(r.pmf, kmax), kmax); },
                        [&](const KatzRisk& r) {
                          r.katz.validate();
                          ComplexBuffer z = roots_of_unity(kmax);
                          for (auto& v : z) v = r.katz.pgf(v);
                          return z;
                        },
                        [&](const CompoundKatzRisk& r) {
                          return compound_pgf_on_roots(r.frequency, dft(checked_masses(r.severity, kmax), kmax));
                        },
                        [&](const ScaledBernoulliRisk& r) {
                          ComplexBuffer zb = root_power(roots_of_unity(kmax), r.b);
                          for (auto& v : zb) v = (1.0 - r.q) + r.q * v;
                          return zb;
                        },
                    },
                    risk);
}

ComplexBuffer risk_phi_on_roots(const RiskModel& risk, std::size_t kmax) {
  return std::visit(
      overloaded{
          [&](const ExplicitRisk& r) { return dft(weighted_by_index(checked_masses(r.pmf, kmax)), kmax); },
          [&](const KatzRisk& r) {
            r.katz.validate();
            ComplexBuffer z = roots_of_unity(kmax);
            for (auto& v : z) v = v * r.katz.pgf_derivative(v);
            return z;
          },
          [&](const CompoundKatzRisk& r) {
            const auto& sev = checked_masses(r.severity, kmax);
            ComplexBuffer pb = dft(sev, kmax);
            ComplexBuffer out = dft(weighted_by_index(sev), kmax);
            for (std::size_t j = 0; j < kmax; ++j) out[j] *= r.frequency.pgf_derivative(pb[j]);
            return out;
          },
          [&](const ScaledBernoulliRisk& r) {
            ComplexBuffer zb = root_power(roots_of_unity(kmax), r.b);
            zb *= cplx(r.q * static_cast<double>(r.b), 0.0);
            return zb;
          },
      },
      risk);
}

}  // namespace allocgen
