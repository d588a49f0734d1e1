#include <doctest.h>

#include <cmath>
#include <vector>

#include "allocgen/dependence.hpp"
#include "allocgen/error.hpp"

using namespace allocgen;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an allocgen::Error");
  return ErrorCode::InvalidArgument;
}

HierarchicalShockSpec sample_shock() {
  return HierarchicalShockSpec::from_labels({{"0", 0.05},    {"1", 0.1},     {"2", 0.08},    {"11", 0.12},
                                             {"12", 0.07},   {"21", 0.09},   {"22", 0.11},   {"111", 0.3},
                                             {"112", 0.25},  {"121", 0.2},   {"122", 0.35},  {"211", 0.15},
                                             {"212", 0.4},   {"221", 0.22},  {"222", 0.18}});
}

std::vector<ScaledBernoulliRisk> table_pool() {
  return {{1, 0.8}, {3, 0.2}, {10, 0.3}, {4, 0.05}, {5, 0.15}, {10, 0.25}};
}

}  // namespace

TEST_CASE("shock allocation at the first levels") {
  const auto spec = sample_shock();
  const std::size_t n = 512;
  const auto fs_dft = shock_fs_dft(spec, n);
  const auto fs = idft(fs_dft);
  const auto leaves = shock_leaves();
  REQUIRE(leaves.size() == 8);
  for (const auto& leaf : leaves) {
    const auto mu = shock_allocation_ogf(spec, leaf, fs_dft);
    const double lijk = spec.leaf[leaf.i - 1][leaf.j - 1][leaf.k - 1];
    const double lij = spec.sub[leaf.i - 1][leaf.j - 1];
    const double li = spec.branch[leaf.i - 1];
    CHECK(std::abs(mu[0]) <= 1e-15);
    CHECK(std::abs(mu[1] - lijk * fs[0]) <= 1e-15);
    for (std::size_t m = 8; m < n; ++m) {
      const double expect = lijk * fs[m - 1] + lij * fs[m - 2] + li * fs[m - 4] + spec.lambda0 * fs[m - 8];
      CHECK(std::abs(mu[m] - expect) <= 1e-14);
    }
  }
}

TEST_CASE("shock model leaves add up to the aggregate") {
  const auto spec = sample_shock();
  const auto t = shock_allocation(spec, 512);
  CHECK(t.n_risks() == 8);
  CHECK(t.max_identity_error() <= 1e-10);
  for (std::size_t k = 0; k < 512; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < 8; ++i) s += t.expected_allocation[i][k];
    CHECK(std::abs(s - static_cast<double>(k) * t.fs_raw[k]) <= 1e-12);
  }
  for (std::size_t i = 0; i < 8; ++i) {
    const auto leaf = shock_leaves()[i];
    CHECK(t.risk_means[i] == doctest::Approx(spec.leaf_mean(leaf.i, leaf.j, leaf.k)));
    CHECK(std::abs(t.expected_cumulative[i].back() - t.risk_means[i]) <= 1e-9);
  }
}

TEST_CASE("shock model with leaf rates only is independent Poisson") {
  std::map<std::string, double> rates;
  const char* names[] = {"111", "112", "121", "122", "211", "212", "221", "222"};
  std::vector<RiskModel> indep;
  for (int i = 0; i < 8; ++i) {
    rates[names[i]] = 0.1 * (i + 1);
    indep.push_back(KatzRisk{KatzParams::poisson(0.1 * (i + 1))});
  }
  const auto spec = HierarchicalShockSpec::from_labels(rates);
  const auto t = shock_allocation(spec, 128);
  const auto ref = allocate_independent(indep, 128);
  CHECK(max_diff(t.fs_raw, ref.fs_raw) <= 1e-14);
  for (std::size_t i = 0; i < 8; ++i) CHECK(max_diff(t.expected_allocation[i], ref.expected_allocation[i]) <= 1e-13);
}

TEST_CASE("invalid shock trees are rejected") {
  CHECK(code_of([] { HierarchicalShockSpec::from_labels({{"3", 0.1}}); }) == ErrorCode::UnknownNode);
  CHECK(code_of([] { HierarchicalShockSpec::from_labels({{"1211", 0.1}}); }) == ErrorCode::UnknownNode);
  CHECK(code_of([] {
          auto s = sample_shock();
          shock_allocation_ogf(s, ShockLeaf{3, 1, 1}, shock_fs_dft(s, 16));
        }) == ErrorCode::UnknownNode);
  CHECK_THROWS_AS(HierarchicalShockSpec::from_labels({{"0", -0.1}}).validate(), Error);
}

TEST_CASE("gamma mixture: transform and convolution paths agree") {
  const GammaMixtureSpec spec{1.0, 2.0, 2.0, 1.0, 1.0};
  const std::size_t n = 1024;
  const auto t = gamma_mixture_allocation(spec, n);
  const auto conv = gamma_mixture_convolution(spec, n);
  CHECK(max_diff(t.fs_raw, conv.fs) <= 1e-11);
  CHECK(max_diff(t.expected_allocation[0], conv.alloc1) <= 1e-11);
  CHECK(max_diff(t.expected_allocation[1], conv.alloc2) <= 1e-11);
  CHECK(t.expected_allocation[0][0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(t.expected_cumulative[0].back() - 1.0) <= 1e-9);
  CHECK(t.max_identity_error() <= 1e-10);
}

TEST_CASE("gamma mixture without a common shock is independent negative binomial") {
  const GammaMixtureSpec spec{0.0, 2.0, 3.0, 1.0, 1.5};
  const std::size_t n = 512;
  const auto t = gamma_mixture_allocation(spec, n);
  const KatzParams nb1 = KatzParams::negative_binomial(2.0, 1.0 / (1.0 + spec.zeta1()));
  const KatzParams nb2 = KatzParams::negative_binomial(3.0, 1.0 / (1.0 + spec.zeta2()));
  const auto ref = allocate_independent({KatzRisk{nb1}, KatzRisk{nb2}}, n);
  CHECK(max_diff(t.fs_raw, ref.fs_raw) <= 1e-12);
  CHECK(max_diff(t.expected_allocation[0], ref.expected_allocation[0]) <= 1e-12);
  const auto cf = allocate_katz_closed_form(nb1, t.fs);
  CHECK(max_diff(cf.expected_allocation, t.expected_allocation[0]) <= 1e-12);
}

TEST_CASE("gamma mixture against enumeration") {
  const GammaMixtureSpec spec{0.5, 1.5, 2.5, 0.8, 1.2};
  const std::size_t n = 64;
  const auto t = gamma_mixture_allocation(spec, n);
  const auto en = oracle_enumerate({{}, spec}, n);
  CHECK(max_diff(t.fs_raw, en.fs_raw) <= 1e-10);
  CHECK(max_diff(t.expected_allocation[0], en.expected_allocation[0]) <= 1e-10);
  CHECK(max_diff(t.expected_allocation[1], en.expected_allocation[1]) <= 1e-10);
}

TEST_CASE("gamma mixture parameter range") {
  CHECK(code_of([] { GammaMixtureSpec{2.5, 2.0, 3.0, 1.0, 1.0}.validate(); }) == ErrorCode::InvalidMixture);
  CHECK(code_of([] { GammaMixtureSpec{-0.1, 2.0, 3.0, 1.0, 1.0}.validate(); }) == ErrorCode::InvalidMixture);
  CHECK(code_of([] { GammaMixtureSpec{0.5, 2.0, 3.0, 0.0, 1.0}.validate(); }) == ErrorCode::InvalidMixture);
}

TEST_CASE("frailty truncation point") {
  CHECK(frailty_theta_star(0.5, 1e-10) == 34);
  CHECK(frailty_theta_star(0.0, 1e-10) == 1);
  CHECK(frailty_theta_star(1e-12, 1e-10) == 2);
  CHECK(frailty_weight(0.5, 1) == 0.5);
  CHECK(frailty_weight(0.5, 3) == 0.125);
}

TEST_CASE("frailty without dependence is the independent Bernoulli pool") {
  FrailtyBernoulliSpec spec{table_pool(), 0.0};
  const auto pg = frailty_bernoulli_pgfs(spec, 64);
  CHECK(pg.theta_star == 1);
  const auto r = roots_of_unity(64);
  for (std::size_t j = 0; j < 64; ++j) {
    cplx prod = 1.0;
    for (const auto& x : spec.risks) prod *= 1.0 - x.q + x.q * std::pow(r[j], static_cast<double>(x.b));
    CHECK(std::abs(pg.fs_dft[j] - prod) <= 1e-14);
  }
  std::vector<RiskModel> indep(spec.risks.begin(), spec.risks.end());
  const auto a = frailty_allocation(spec, 64);
  const auto b = allocate_independent(indep, 64);
  for (std::size_t i = 0; i < 6; ++i) CHECK(max_diff(a.expected_allocation[i], b.expected_allocation[i]) <= 1e-13);
}

TEST_CASE("frailty marginals reconstruct the success probabilities") {
  FrailtyBernoulliSpec spec{table_pool(), 0.5};
  const auto bases = frailty_bases(spec);
  for (std::size_t i = 0; i < spec.risks.size(); ++i) {
    CHECK(bases[i] > 0.0);
    CHECK(bases[i] < 1.0);
    CHECK(std::abs(frailty_marginal(spec, i) - spec.risks[i].q) <= 1e-9);
  }
  const auto t = frailty_allocation(spec, 64);
  for (std::size_t i = 0; i < spec.risks.size(); ++i)
    CHECK(std::abs(t.expected_cumulative[i].back() - spec.risks[i].b * spec.risks[i].q) <= 1e-9 * spec.risks[i].b);
  CHECK(t.max_identity_error() <= 1e-10);
}

TEST_CASE("frailty converges to independence as the dependence vanishes") {
  FrailtyBernoulliSpec weak{table_pool(), 1e-12};
  FrailtyBernoulliSpec none{table_pool(), 0.0};
  const auto a = frailty_allocation(weak, 64);
  const auto b = frailty_allocation(none, 64);
  CHECK(max_diff(a.fs_raw, b.fs_raw) <= 1e-9);
  for (std::size_t i = 0; i < 6; ++i) CHECK(max_diff(a.expected_allocation[i], b.expected_allocation[i]) <= 1e-9);
}

TEST_CASE("frailty against enumeration") {
  FrailtyBernoulliSpec spec{table_pool(), 0.5};
  const auto t = frailty_allocation(spec, 64);
  const auto en = oracle_enumerate({{}, spec}, 64);
  CHECK(max_diff(t.fs_raw, en.fs_raw) <= 1e-12);
  for (std::size_t i = 0; i < 6; ++i) CHECK(max_diff(t.expected_allocation[i], en.expected_allocation[i]) <= 1e-12);
}

TEST_CASE("frailty parameter checks") {
  CHECK(code_of([] { FrailtyBernoulliSpec{table_pool(), 1.0}.validate(); }) == ErrorCode::InvalidFrailty);
  CHECK(code_of([] { FrailtyBernoulliSpec{{{1, 0.0}}, 0.5}.validate(); }) == ErrorCode::InvalidMarginal);
  CHECK(code_of([] { FrailtyBernoulliSpec{{{1, 1.0}}, 0.5}.validate(); }) == ErrorCode::InvalidMarginal);
}

TEST_CASE("dependent portfolios through the common entry point") {
  CHECK(portfolio_size({{}, sample_shock()}) == 8);
  CHECK(portfolio_size({{}, GammaMixtureSpec{0.5, 1.0, 1.0, 1.0, 1.0}}) == 2);
  CHECK(dependence_name(Independent{}) != dependence_name(sample_shock()));
  const auto t = allocate({{}, FrailtyBernoulliSpec{table_pool(), 0.3}}, 64);
  CHECK(t.n_risks() == 6);
  CHECK(t.max_identity_error() <= 1e-10);
}
