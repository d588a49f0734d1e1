#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "allocgen/allocation.hpp"
#include "allocgen/dependence.hpp"
#include "allocgen/error.hpp"
#include "allocgen/scenario.hpp"

using namespace allocgen;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t len) {
  double m = 0.0;
  for (std::size_t k = 0; k < len; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  return max_diff(a, b, a.size());
}

RiskModel explicit_risk(std::vector<double> v) { return ExplicitRisk{pmf_from_values(std::move(v))}; }

std::vector<RiskModel> small_pool() {
  return {compound_poisson(0.08, pmf_from_values({0, 0.1, 0.2, 0.4, 0.3})),
          compound_poisson(0.08, pmf_from_values({0, 0.15, 0.25, 0.3, 0.3})),
          compound_poisson(0.1, pmf_from_values({0, 0.1, 0.2, 0.3, 0.4})),
          compound_poisson(0.1, pmf_from_values({0, 0.15, 0.25, 0.3, 0.3}))};
}

std::vector<RiskModel> bernoulli_table_pool() {
  const std::size_t b[] = {1, 3, 10, 4, 5, 10};
  const double q[] = {0.8, 0.2, 0.3, 0.05, 0.15, 0.25};
  std::vector<RiskModel> out;
  for (int i = 0; i < 6; ++i) out.push_back(ScaledBernoulliRisk{b[i], q[i]});
  return out;
}

std::vector<double> poisson_masses(double lambda, std::size_t n) {
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = poisson_pmf(lambda, k);
  return f;
}

}  // namespace

TEST_CASE("two Poisson risks split proportionally to their rates") {
  const auto t = allocate_independent({KatzRisk{KatzParams::poisson(1.5)}, KatzRisk{KatzParams::poisson(0.5)}}, 64);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < 64; ++k) {
    if (!t.valid_mask[k]) continue;
    CHECK(std::abs(t.conditional_mean[0][k] - 0.75 * static_cast<double>(k)) <= t.tolerance_used);
    CHECK(std::abs(t.conditional_mean[1][k] - 0.25 * static_cast<double>(k)) <= t.tolerance_used);
    if (t.fs_raw[k] > 1e-6) CHECK(std::abs(t.conditional_mean[0][k] - 0.75 * static_cast<double>(k)) <= 1e-10);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("a single risk is its own conditional mean") {
  const auto t = allocate_independent({explicit_risk({0.2, 0.3, 0, 0.5})}, 8);
  for (std::size_t k : {0, 1, 3}) {
    REQUIRE(t.valid_mask[k]);
    CHECK(std::abs(t.conditional_mean[0][k] - static_cast<double>(k)) <= 1e-12);
  }
  CHECK_FALSE(t.valid_mask[2]);
  CHECK(t.valid_count() == 3);
}

TEST_CASE("Bernoulli pool agrees with enumeration of all outcomes") {
  const PortfolioModel model{bernoulli_table_pool(), Independent{}};
  const auto fft = allocate(model, 64);
  const auto ref = oracle_enumerate(model, 64);
  CHECK(max_diff(fft.fs_raw, ref.fs_raw) <= 1e-10);
  for (std::size_t i = 0; i < 6; ++i) CHECK(max_diff(fft.expected_allocation[i], ref.expected_allocation[i]) <= 1e-10);
}

TEST_CASE("levels reached by a single subset allocate all or nothing") {
  const std::size_t b[] = {1, 3, 10, 4, 5, 10};
  const auto fft = allocate({bernoulli_table_pool(), Independent{}}, 64);
  std::vector<int> subsets(34, 0);
  std::vector<unsigned> only(34, 0);
  for (unsigned mask = 0; mask < 64; ++mask) {
    std::size_t s = 0;
    for (int i = 0; i < 6; ++i)
      if (mask & (1u << i)) s += b[i];
    ++subsets[s];
    only[s] = mask;
  }
  std::size_t singletons = 0;
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    if (subsets[k] != 1 || !fft.valid_mask[k]) continue;
    ++singletons;
    for (int i = 0; i < 6; ++i) {
      const double expect = (only[k] & (1u << i)) ? static_cast<double>(b[i]) : 0.0;
      CHECK(std::abs(fft.conditional_mean[i][k] - expect) <= 1e-10);
    }
  }
  CHECK(singletons > 5);
}

TEST_CASE("Poisson closed form is the shifted aggregate pmf") {
  const double lam = 0.7;
  const auto t = allocate_independent({KatzRisk{KatzParams::poisson(lam)}, explicit_risk({0.2, 0.5, 0.3})}, 64);
  const auto cf = allocate_katz_closed_form(KatzParams::poisson(lam), t.fs);
  CHECK(cf.expected_allocation[0] == 0.0);
  for (std::size_t k = 1; k < 64; ++k) CHECK(cf.expected_allocation[k] == doctest::Approx(lam * t.fs.masses[k - 1]));
}

TEST_CASE("Katz closed forms match the transform path") {
  const KatzParams families[] = {KatzParams::poisson(0.7), KatzParams::negative_binomial(2.0, 0.6),
                                 KatzParams::negative_binomial(3.0, 0.6), KatzParams::binomial(5, 0.3)};
  for (const auto& kp : families) {
    const std::size_t n = 256;
    const auto t = allocate_independent({KatzRisk{kp}, KatzRisk{KatzParams::poisson(1.2)}}, n);
    const auto cf = allocate_katz_closed_form(kp, t.fs);
    CHECK(cf.expected_allocation[0] == 0.0);
    CHECK(max_diff(cf.expected_allocation, t.expected_allocation[0]) <= 1e-11);
    CHECK(max_diff(cf.expected_cumulative, t.expected_cumulative[0]) <= 1e-11);
    const auto F = cdf(t.fs);
    for (std::size_t k = 0; k < n; ++k) {
      const double Fm1 = k == 0 ? 0.0 : F[k - 1];
      const double rel = (kp.a - 1.0) * cf.expected_cumulative[k] - kp.a * cf.expected_allocation[k] + (kp.a + kp.b) * Fm1;
      CHECK(std::abs(rel) <= 1e-10);
    }
  }
}

TEST_CASE("Katz parameter domain") {
  CHECK_THROWS_AS(KatzParams({1.0, 0.5}).validate(), Error);
  CHECK_THROWS_AS(allocate_katz_closed_form({-1.2, 3.0}, pmf_from_values({1.0})), Error);
  const auto bin = KatzParams::binomial(5, 0.3);
  CHECK(bin.a == doctest::Approx(-0.3 / 0.7));
  CHECK(bin.b == doctest::Approx(6.0 * 0.3 / 0.7));
  CHECK(bin.mean() == doctest::Approx(1.5));
  CHECK(KatzParams::negative_binomial(3.0, 0.6).mean() == doctest::Approx(2.0));
  CHECK(KatzParams::poisson(0.7).mean() == doctest::Approx(0.7));
  const auto f = bin.pmf(8);
  double m = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) m += static_cast<double>(k) * f[k];
  CHECK(m == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("negative binomial series for a single risk") {
  for (std::size_t k : {0, 1, 3, 10}) {
    const auto r = allocate_negbin_convolution({{2.5, 0.4}}, k);
    CHECK(r.value == doctest::Approx(static_cast<double>(k) * negbin_pmf(2.5, 0.4, k)).epsilon(1e-12));
  }
}

TEST_CASE("negative binomial series against the transform path") {
  const auto t = allocate_independent(
      {KatzRisk{KatzParams::negative_binomial(2, 0.5)}, KatzRisk{KatzParams::negative_binomial(3, 0.5)}}, 256);
  CHECK(std::abs(allocate_negbin_convolution({{2, 0.5}, {3, 0.5}}, 3).value - t.expected_allocation[0][3]) <= 1e-10);

  const auto u = allocate_independent({KatzRisk{KatzParams::negative_binomial(2, 0.3)},
                                       KatzRisk{KatzParams::negative_binomial(1.5, 0.7)},
                                       KatzRisk{KatzParams::negative_binomial(0.5, 0.45)}},
                                      512);
  for (std::size_t k = 0; k < 30; ++k) {
    const auto r = allocate_negbin_convolution({{2, 0.3}, {1.5, 0.7}, {0.5, 0.45}}, k);
    CHECK(std::abs(r.value - u.expected_allocation[0][k]) <= 1e-10);
    CHECK(r.tail_bound >= 0.0);
  }
}

TEST_CASE("equal success probabilities reduce to the Katz closed form") {
  const std::size_t n = 64;
  const auto fs = pmf_from_values(KatzParams::negative_binomial(3.5, 0.4).pmf(n));
  const auto cf = allocate_katz_closed_form(KatzParams::negative_binomial(2.0, 0.4), fs);
  for (std::size_t k = 0; k < 20; ++k) {
    const auto r = allocate_negbin_convolution({{2.0, 0.4}, {1.5, 0.4}}, k);
    CHECK(r.value == doctest::Approx(cf.expected_allocation[k]).epsilon(1e-11));
  }
}

TEST_CASE("compound Poisson with unit severity is the Poisson row") {
  const std::size_t n = 64;
  const double lam = 0.6;
  const CompoundKatzRisk risk{KatzParams::poisson(lam), pmf_from_values({0, 1})};
  const std::vector<double> others = {0.3, 0.4, 0.3};
  const auto out = allocate_compound_katz(risk, dft(others, n), n);
  const auto fs = convolve(poisson_masses(lam, n), others, n);
  CHECK(out.expected_allocation[0] == doctest::Approx(0.0).epsilon(1e-15));
  for (std::size_t k = 1; k < n; ++k) CHECK(std::abs(out.expected_allocation[k] - lam * fs[k - 1]) <= 1e-14);
}

TEST_CASE("compound Poisson with negative binomial severity against its explicit pmf") {
  const std::size_t n = 256;
  const CompoundKatzRisk risk{KatzParams::poisson(0.1), negbin_severity(2.0, 0.45, n)};
  const std::vector<double> others = {0.5, 0.2, 0.2, 0.1};
  const auto direct = allocate_compound_katz(risk, dft(others, n), n);
  const auto exp = allocate_independent({explicit_risk(risk_pmf(RiskModel{risk}, n)), explicit_risk(others)}, n);
  CHECK(max_diff(direct.expected_allocation, exp.expected_allocation[0]) <= 1e-11);
}

TEST_CASE("compound negative binomial against the size-biased oracle") {
  const std::size_t n = 256;
  const CompoundKatzRisk risk{KatzParams::negative_binomial(2.0, 0.5), pmf_from_values({0, 0.6, 0.4})};
  const std::vector<double> others = {0.4, 0.3, 0.3};
  const auto direct = allocate_compound_katz(risk, dft(others, n), n);
  const auto oracle = oracle_size_biased(RiskModel{risk}, padded(pmf_from_values(others), n));
  CHECK(max_diff(direct.expected_allocation, oracle) <= 1e-11);
}

TEST_CASE("small pool: algorithm, general path and size-biased oracle agree") {
  const auto pool = small_pool();
  const auto a1 = run_algorithm_1(pool, 64);
  const auto gen = allocate_independent(pool, 64);
  for (std::size_t i = 0; i < 4; ++i) CHECK(max_diff(a1.expected_allocation[i], gen.expected_allocation[i]) <= 1e-12);
  const auto rest = allocate_independent({pool[1], pool[2], pool[3]}, 64);
  const auto sb = oracle_size_biased(pool[0], rest.fs);
  CHECK(max_diff(sb, a1.expected_allocation[0]) <= 1e-11);
}

TEST_CASE("small pool validity flags") {
  const auto t = run_algorithm_1(small_pool(), 64);
  for (std::size_t k = 0; k <= 20; ++k) CHECK(t.valid_mask[k]);
  CHECK_FALSE(t.valid_mask[38]);
  CHECK_FALSE(t.valid_mask[43]);
  CHECK_FALSE(t.valid_mask[63]);
  CHECK(t.fs_raw[43] < 1e-15);
  CHECK(t.fs_raw[63] < 1e-15);
  CHECK(std::isnan(t.conditional_mean[0][43]));
  CHECK(t.max_identity_error() <= 1e-10);
}

TEST_CASE("algorithm on a single compound Poisson risk") {
  const auto t = run_algorithm_1({compound_poisson(0.5, pmf_from_values({0, 0.5, 0.5}))}, 64);
  for (std::size_t k = 0; k < 64; ++k)
    if (t.valid_mask[k]) CHECK(std::abs(t.conditional_mean[0][k] - static_cast<double>(k)) <= t.tolerance_used);
  CHECK(t.valid_count() > 10);
}

TEST_CASE("first large pool risk has the stated mean") {
  const double lam = 0.161152, r = 2.0, q = 0.489756;
  const std::size_t n = std::size_t{1} << 13;
  const RiskModel risk = compound_poisson(lam, negbin_severity(r, q, n));
  // The printed rate and probability carry six decimals, which moves the mean by up to 2.5e-6.
  CHECK(std::abs(risk_mean_index(risk) - 0.335788) <= 2.5e-6);
  const auto t = run_algorithm_1({risk}, n);
  CHECK(std::abs(t.expected_cumulative[0].back() - risk_mean_index(risk)) <= 1e-12);
}

TEST_CASE("streaming and cached algorithm give the same table") {
  const auto params = sample_large_pool(200, 42);
  std::vector<RiskModel> pool;
  for (const auto& p : params) pool.push_back(compound_poisson(p.lambda, negbin_severity(p.r, p.q, 1024)));
  const auto cached = run_algorithm_1(pool, 1024);
  Algorithm1Options opts;
  opts.force_streaming = true;
  const auto streamed = run_algorithm_1(pool, 1024, opts);
  CHECK(cached.fs_raw == streamed.fs_raw);
  for (std::size_t i = 0; i < pool.size(); ++i) CHECK(cached.expected_allocation[i] == streamed.expected_allocation[i]);
}

TEST_CASE("a point mass aggregate has exactly one valid level") {
  const auto t = allocate_independent({explicit_risk({0, 0, 1})}, 4);
  CHECK(t.valid_count() == 1);
  CHECK(t.valid_mask[2]);
}

TEST_CASE("masking recomputes validity at a new tolerance") {
  const auto t = run_algorithm_1(small_pool(), 64);
  const auto loose = mask_validity(t, 0.1);
  CHECK(loose.valid_count() >= t.valid_count());
  CHECK(loose.tolerance_used == 0.1);
  CHECK(loose.valid_mask[38]);
  CHECK_FALSE(loose.valid_mask[43]);
}

TEST_CASE("empty aggregate is rejected") {
  CHECK_THROWS_AS(make_table(std::vector<double>(8, 0.0), {std::vector<double>(8, 0.0)}, 1.0, {0.0}), Error);
}

TEST_CASE("layer split") {
  const double lam = 0.9;
  const auto t = allocate_independent({KatzRisk{KatzParams::poisson(lam)}, explicit_risk({0.1, 0.4, 0.5})}, 64);
  const auto F = cdf(t.fs);
  for (std::size_t l1 : {1, 2, 4}) {
    const auto s = cumulative_and_layers(t, l1, 6, 0);
    CHECK(std::abs(s.retained + s.layer + s.excess - lam) <= 1e-10);
    CHECK(s.retained == doctest::Approx(lam * F[l1 - 1]).epsilon(1e-12));
  }
  const auto top = cumulative_and_layers(t, 3, 63, 0);
  CHECK(std::abs(top.excess - t.truncation.lost_mean) <= 1e-12);
  CHECK_THROWS_AS(cumulative_and_layers(t, 6, 6, 0), Error);
  CHECK_THROWS_AS(cumulative_and_layers(t, 7, 6, 0), Error);
  try {
    cumulative_and_layers(t, 6, 2, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidLayer);
  }
}

TEST_CASE("enumeration of two fair coins") {
  const auto t = oracle_enumerate({{ScaledBernoulliRisk{1, 0.5}, ScaledBernoulliRisk{1, 0.5}}, Independent{}}, 4);
  CHECK(t.expected_allocation[0][1] == doctest::Approx(0.25));
  CHECK(t.expected_allocation[0][2] == doctest::Approx(0.25));
  CHECK(t.fs_raw[1] == doctest::Approx(0.5));
}

TEST_CASE("enumeration of two unit Poisson risks is proportional") {
  const std::size_t n = 32;
  const PortfolioModel m{{explicit_risk(poisson_masses(1.0, 21)), explicit_risk(poisson_masses(1.0, 21))},
                         Independent{}};
  const auto t = oracle_enumerate(m, n);
  for (std::size_t k = 0; k <= 20; ++k)
    CHECK(std::abs(t.expected_allocation[0][k] - 0.5 * static_cast<double>(k) * t.fs_raw[k]) <= 1e-15);
}

TEST_CASE("enumeration budget") {
  const PortfolioModel m{{explicit_risk(std::vector<double>(16, 1.0 / 16)), explicit_risk(std::vector<double>(16, 1.0 / 16))},
                         Independent{}};
  try {
    oracle_enumerate(m, 64, 100);
    FAIL("budget not enforced");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OracleBudget);
  }
}

TEST_CASE("size-biased oracle special cases") {
  const auto others = padded(pmf_from_values({0.5, 0.3, 0.2}), 8);
  const auto deg = oracle_size_biased(explicit_risk({0, 0, 1}), others);
  for (std::size_t s = 0; s < 8; ++s) CHECK(deg[s] == doctest::Approx(s >= 2 ? 2.0 * others.masses[s - 2] : 0.0));

  const double lam = 1.3;
  const std::size_t n = 64;
  const auto pois = oracle_size_biased(KatzRisk{KatzParams::poisson(lam)}, padded(others, n));
  const auto fs = convolve(poisson_masses(lam, n), others.masses, n);
  for (std::size_t s = 1; s < 40; ++s) CHECK(std::abs(pois[s] - lam * fs[s - 1]) <= 1e-14);

  const auto zero = oracle_size_biased(explicit_risk({1.0}), others);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("random independent portfolios: three methods agree") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nrisk(2, 4), npts(2, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<RiskModel> risks;
    const int n = nrisk(rng);
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(static_cast<std::size_t>(npts(rng)));
      double s = 0.0;
      for (auto& x : v) s += x = u(rng);
      for (auto& x : v) x /= s;
      risks.push_back(explicit_risk(v));
    }
    const std::size_t kmax = 32;
    const auto fft = allocate_independent(risks, kmax);
    const auto en = oracle_enumerate({risks, Independent{}}, kmax);
    for (int i = 0; i < n; ++i) {
      std::vector<RiskModel> rest;
      for (int j = 0; j < n; ++j)
        if (j != i) rest.push_back(risks[static_cast<std::size_t>(j)]);
      const auto others = allocate_independent(rest, kmax).fs;
      const auto sb = oracle_size_biased(risks[static_cast<std::size_t>(i)], others);
      CHECK(max_diff(fft.expected_allocation[i], en.expected_allocation[i]) <= 1e-10);
      CHECK(max_diff(sb, en.expected_allocation[i]) <= 1e-10);
    }
  }
}

TEST_CASE("table invariants on the small pool") {
  const auto pool = small_pool();
  const auto t = allocate_independent(pool, 64);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(t.expected_cumulative[i] == partial_sum_coeffs(t.expected_allocation[i]));
    CHECK(std::abs(t.expected_cumulative[i].back() - (t.risk_means[i] - 0.0)) <= 1e-9 + t.truncation.lost_mean);
    for (std::size_t k = 0; k < 64; ++k) {
      if (!t.valid_mask[k]) continue;
      CHECK(t.conditional_mean[i][k] >= -1e-12);
      CHECK(t.conditional_mean[i][k] <= static_cast<double>(k) + 1e-10);
    }
  }
  CHECK(t.max_identity_error() <= 1e-10);
}

TEST_CASE("aliasing is reported when the lattice is too short") {
  const auto t = allocate_independent({explicit_risk({0, 0, 0, 0.5, 0.5}), explicit_risk({0, 0, 0, 0.5, 0.5})}, 8);
  CHECK_FALSE(t.warnings.empty());
}
