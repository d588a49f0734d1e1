#include "allocgen/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "allocgen/error.hpp"

#ifndef ALLOCGEN_SCENARIO_DIR
#define ALLOCGEN_SCENARIO_DIR "scenarios"
#endif

namespace allocgen {

namespace {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : gen_(seed) {}
  double operator()() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigError, path + ": " + what);
}

template <class T>
T get(const YAML::Node& node, const std::string& key, const std::string& path) {
  const YAML::Node v = node[key];
  if (!v) config_error(path + "." + key, "missing");
  try {
    return v.as<T>();
  } catch (const YAML::Exception& e) {
    config_error(path + "." + key, "bad value (" + std::string(e.what()) + ")");
  }
}

template <class T>
T get_or(const YAML::Node& node, const std::string& key, T fallback, const std::string& path) {
  if (!node[key]) return fallback;
  return get<T>(node, key, path);
}

Discretization parse_discretization(const std::string& s, const std::string& path) {
  if (s == "moment_matching" || s == "unbiased") return Discretization::moment_matching;
  if (s == "upper") return Discretization::upper;
  if (s == "lower") return Discretization::lower;
  config_error(path, "unknown discretization '" + s + "'");
}

DiscretePMF parse_severity(const YAML::Node& node, const std::string& path) {
  if (!node) config_error(path, "missing severity");
  if (node.IsSequence()) return pmf_from_values(node.as<std::vector<double>>());
  const auto type = get<std::string>(node, "type", path);
  if (type == "explicit")
    return pmf_from_values(get<std::vector<double>>(node, "values", path), get_or(node, "step", 1.0, path));
  if (type == "negative_binomial")
    return negbin_severity(get<double>(node, "r", path), get<double>(node, "q", path),
                           get<std::size_t>(node, "points", path));
  config_error(path + ".type", "unknown severity type '" + type + "'");
}

RiskModel parse_risk(const YAML::Node& node, const std::string& path) {
  const auto type = get<std::string>(node, "type", path);
  if (type == "explicit")
    return ExplicitRisk{pmf_from_values(get<std::vector<double>>(node, "values", path), get_or(node, "step", 1.0, path))};
  if (type == "poisson") return KatzRisk{KatzParams::poisson(get<double>(node, "lambda", path))};
  if (type == "negative_binomial")
    return KatzRisk{KatzParams::negative_binomial(get<double>(node, "r", path), get<double>(node, "q", path))};
  if (type == "binomial")
    return KatzRisk{KatzParams::binomial(get<unsigned>(node, "m", path), get<double>(node, "q", path))};
  if (type == "katz") return KatzRisk{{get<double>(node, "a", path), get<double>(node, "b", path)}};
  if (type == "compound_poisson")
    return compound_poisson(get<double>(node, "lambda", path), parse_severity(node["severity"], path + ".severity"));
  if (type == "compound_katz")
    return CompoundKatzRisk{{get<double>(node, "a", path), get<double>(node, "b", path)},
                            parse_severity(node["severity"], path + ".severity")};
  if (type == "bernoulli") return ScaledBernoulliRisk{get<std::size_t>(node, "b", path), get<double>(node, "q", path)};
  if (type == "pareto") {
    const auto method = parse_discretization(get_or<std::string>(node, "method", "moment_matching", path), path);
    return ExplicitRisk{arithmetized_pareto(get<double>(node, "alpha", path), get<double>(node, "lambda", path),
                                            get<std::size_t>(node, "points", path), method)
                            .first};
  }
  config_error(path + ".type", "unknown risk type '" + type + "'");
}

void append_generated(const YAML::Node& gen, std::uint64_t seed, std::vector<RiskModel>& risks,
                      std::vector<std::string>& notes, const std::string& path) {
  const auto kind = get<std::string>(gen, "kind", path);
  const auto count = get<std::size_t>(gen, "count", path);
  std::ostringstream note;
  note << "generated " << count << " " << kind << " risks with mt19937_64 seed " << seed;
  notes.push_back(note.str());
  if (kind == "large_pool") {
    const auto points = get<std::size_t>(gen, "severity_points", path);
    for (const auto& p : sample_large_pool(count, seed))
      risks.push_back(compound_poisson(p.lambda, negbin_severity(p.r, p.q, points)));
  } else if (kind == "pareto") {
    const auto points = get<std::size_t>(gen, "points", path);
    for (const auto& p : sample_pareto(count, seed))
      risks.push_back(ExplicitRisk{arithmetized_pareto(p.alpha, p.lambda, points).first});
  } else if (kind == "bernoulli") {
    for (const auto& b : sample_bernoulli(count, seed)) risks.push_back(b);
  } else {
    config_error(path + ".kind", "unknown generator '" + kind + "'");
  }
}

}  // namespace

std::vector<LargePoolParams> sample_large_pool(std::size_t count, std::uint64_t seed) {
  Uniform u(seed);
  std::vector<LargePoolParams> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LargePoolParams p;
    p.lambda = -std::log1p(-u()) / 10.0;
    p.r = 1.0 + std::floor(6.0 * u());
    p.q = 0.4 + 0.1 * u();
    out.push_back(p);
  }
  return out;
}

DiscretePMF negbin_severity(double r, double q, std::size_t points) {
  if (points < 2) fail(ErrorCode::InvalidSize, "severity needs at least two points");
  std::vector<double> f(points, 0.0);
  double term = negbin_pmf(r, q, 0);
  auto ratio = [&](std::size_t k) { return (1.0 - q) * (r + static_cast<double>(k)) / static_cast<double>(k + 1); };
  std::size_t k = 0;
  for (; k + 1 < points && term >= std::numeric_limits<double>::min(); ++k) {
    f[k] = term;
    term *= ratio(k);
  }
  // The last point carries the summed upper tail.
  double tail = 0.0;
  constexpr std::size_t kTailSteps = 10000000;
  for (std::size_t steps = 0; steps < kTailSteps && term >= std::numeric_limits<double>::min() && term > 1e-18 * tail;
       ++steps, ++k) {
    tail += term;
    term *= ratio(k);
  }
  if (term > 1e-18 * tail && ratio(k) < 1.0) tail += term / (1.0 - ratio(k));
  f[points - 1] = tail;
  // Points past the underflow of the head are exact zeros.
  while (f.size() > 1 && f.back() == 0.0) f.pop_back();
  f.shrink_to_fit();
  return pmf_from_values(std::move(f));
}

std::vector<ParetoParams> sample_pareto(std::size_t count, std::uint64_t seed) {
  Uniform u(seed);
  std::vector<ParetoParams> out;
  for (std::size_t i = 0; i < count; ++i) {
    ParetoParams p;
    p.alpha = 1.3 + 0.6 * u();
    p.lambda = 5.0 + 10.0 * u();
    out.push_back(p);
  }
  return out;
}

std::pair<DiscretePMF, TruncationReport> arithmetized_pareto(double alpha, double lambda, std::size_t points,
                                                             Discretization method) {
  if (!(alpha > 1.0) || !(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "Pareto needs alpha > 1, lambda > 0");
  auto cdf_fn = [=](double x) { return 1.0 - std::pow(lambda / (lambda + x), alpha); };
  auto lev_fn = [=](double x) { return lambda / (alpha - 1.0) * (1.0 - std::pow(lambda / (lambda + x), alpha - 1.0)); };
  return arithmetize(cdf_fn, lev_fn, method, points, 1.0, lambda / (alpha - 1.0));
}

std::vector<ScaledBernoulliRisk> sample_bernoulli(std::size_t count, std::uint64_t seed) {
  Uniform u(seed);
  std::vector<ScaledBernoulliRisk> out;
  for (std::size_t i = 0; i < count; ++i) {
    ScaledBernoulliRisk r;
    double q = u();
    while (q == 0.0) q = u();
    r.q = q;
    r.b = 1 + static_cast<std::size_t>(std::floor(10.0 * u()));
    out.push_back(r);
  }
  return out;
}

ScenarioConfig parse_scenario(const std::string& yaml_text, const ScenarioOverrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    config_error("<document>", e.what());
  }
  if (!root.IsMap()) config_error("<document>", "top level must be a mapping");

  ScenarioConfig c;
  c.name = get_or<std::string>(root, "name", "scenario", "");
  c.seed = overrides.seed ? *overrides.seed : get_or<std::uint64_t>(root, "seed", 1, "");
  c.tolerance = overrides.tolerance ? *overrides.tolerance : get_or(root, "tolerance", kDefaultTolerance, "");
  c.underflow_floor = get_or(root, "underflow_floor", kDefaultUnderflowFloor, "");
  const auto method = get_or<std::string>(root, "method", "auto", "");
  if (method == "auto") c.method = Method::automatic;
  else if (method == "fft") c.method = Method::fft;
  else if (method == "algorithm1") c.method = Method::algorithm1;
  else config_error(".method", "expected auto, fft or algorithm1");
  c.force_streaming = get_or(root, "streaming", false, "");

  const YAML::Node model = root["model"];
  if (!model || !model.IsMap()) config_error(".model", "missing mapping");
  const auto dep = get_or<std::string>(model, "dependence", "independent", ".model");
  std::size_t support_hint = 0;
  try {
    if (dep == "independent") {
      const YAML::Node risks = model["risks"];
      if (risks) {
        if (!risks.IsSequence()) config_error(".model.risks", "expected a list");
        for (std::size_t i = 0; i < risks.size(); ++i)
          c.model.risks.push_back(parse_risk(risks[i], ".model.risks[" + std::to_string(i) + "]"));
      }
      if (model["generated"]) append_generated(model["generated"], c.seed, c.model.risks, c.notes, ".model.generated");
      if (c.model.risks.empty()) config_error(".model.risks", "portfolio is empty");
      for (const auto& r : c.model.risks) {
        const auto m = risk_max_support(r);
        support_hint += m ? *m : 0;
      }
    } else if (dep == "shock") {
      const YAML::Node s = model["shock"];
      if (!s || !s.IsMap()) config_error(".model.shock", "missing mapping of node labels to rates");
      std::map<std::string, double> labels;
      for (const auto& kv : s) labels[kv.first.as<std::string>()] = kv.second.as<double>();
      c.model.dependence = HierarchicalShockSpec::from_labels(labels);
    } else if (dep == "gamma_mixture") {
      const YAML::Node g = model["gamma_mixture"];
      const std::string p = ".model.gamma_mixture";
      if (!g) config_error(p, "missing");
      GammaMixtureSpec spec{get<double>(g, "gamma0", p), get<double>(g, "r1", p), get<double>(g, "r2", p),
                            get<double>(g, "lambda1", p), get<double>(g, "lambda2", p)};
      spec.validate();
      c.model.dependence = spec;
    } else if (dep == "frailty") {
      const YAML::Node f = model["frailty"];
      const std::string p = ".model.frailty";
      if (!f) config_error(p, "missing");
      FrailtyBernoulliSpec spec;
      spec.alpha = get<double>(f, "alpha", p);
      spec.epsilon = get_or(f, "epsilon", 1e-10, p);
      const YAML::Node risks = f["risks"];
      for (std::size_t i = 0; risks && i < risks.size(); ++i) {
        const std::string rp = p + ".risks[" + std::to_string(i) + "]";
        spec.risks.push_back({get<std::size_t>(risks[i], "b", rp), get<double>(risks[i], "q", rp)});
      }
      if (f["generated"]) {
        const auto count = get<std::size_t>(f["generated"], "count", p + ".generated");
        for (const auto& b : sample_bernoulli(count, c.seed)) spec.risks.push_back(b);
        c.notes.push_back("generated " + std::to_string(count) + " bernoulli risks with mt19937_64 seed " +
                          std::to_string(c.seed));
      }
      spec.validate();
      for (const auto& r : spec.risks) support_hint += r.b;
      c.model.dependence = spec;
    } else {
      config_error(".model.dependence", "unknown regime '" + dep + "'");
    }
  } catch (const YAML::Exception& e) {
    config_error(".model", e.what());
  }

  if (overrides.kmax) {
    c.kmax = *overrides.kmax;
  } else if (root["kmax"] && root["kmax"].as<std::string>() == "auto") {
    c.kmax = next_pow2(support_hint + 1);
  } else {
    c.kmax = get<std::size_t>(root, "kmax", "");
  }
  if (!is_pow2(c.kmax)) config_error(".kmax", "must be a power of two, got " + std::to_string(c.kmax));

  const YAML::Node out = root["outputs"];
  if (out) {
    c.outputs.allocations = get_or(out, "allocations", true, ".outputs");
    const YAML::Node cmd = out["cond_mean_dist"];
    if (cmd) {
      if (cmd.IsScalar() && cmd.as<std::string>() == "all") c.outputs.all_cond_mean_dists = true;
      else c.outputs.cond_mean_dist_risks = get<std::vector<std::size_t>>(out, "cond_mean_dist", ".outputs");
    }
    const YAML::Node rv = out["rvar"];
    for (std::size_t i = 0; rv && i < rv.size(); ++i) {
      const auto lv = rv[i].as<std::vector<double>>();
      if (lv.size() != 2) config_error(".outputs.rvar[" + std::to_string(i) + "]", "expected [alpha1, alpha2]");
      RVaRLevels l{lv[0], lv[1]};
      try {
        l.validate();
      } catch (const Error& e) {
        config_error(".outputs.rvar[" + std::to_string(i) + "]", e.what());
      }
      c.outputs.rvar.push_back(l);
    }
    const YAML::Node ly = out["layers"];
    for (std::size_t i = 0; ly && i < ly.size(); ++i) {
      const auto v = ly[i].as<std::vector<std::size_t>>();
      if (v.size() != 2) config_error(".outputs.layers[" + std::to_string(i) + "]", "expected [l1, l2]");
      c.outputs.layers.emplace_back(v[0], v[1]);
    }
    c.outputs.max_risk_columns = get_or<std::size_t>(out, "max_risk_columns", 0, ".outputs");
  }
  const std::size_t n = portfolio_size(c.model);
  for (auto i : c.outputs.cond_mean_dist_risks)
    if (i == 0 || i > n) config_error(".outputs.cond_mean_dist", "risk index " + std::to_string(i) + " out of range");
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), overrides);
}

std::filesystem::path scenario_dir() {
  if (const char* env = std::getenv("ALLOCGEN_SCENARIO_DIR")) return env;
  return ALLOCGEN_SCENARIO_DIR;
}

ConditionalMeanDistribution conditional_mean_distribution(const AllocationTable& table, std::size_t risk) {
  if (risk >= table.n_risks()) fail(ErrorCode::InvalidArgument, "risk index out of range");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < table.kmax(); ++k)
    if (table.valid_mask[k]) pts.emplace_back(table.conditional_mean[risk][k], table.fs[k]);
  if (pts.empty()) fail(ErrorCode::EmptyDistribution, "no valid lattice points");
  std::sort(pts.begin(), pts.end());
  ConditionalMeanDistribution d;
  std::vector<double> first, moment;
  for (const auto& [v, m] : pts) {
    if (!first.empty() && std::abs(v - first.back()) <= 1e-12 * std::max(1.0, std::abs(v))) {
      d.masses.back() += m;
      moment.back() += m * v;
    } else {
      first.push_back(v);
      d.masses.push_back(m);
      moment.push_back(m * v);
    }
  }
  // Merged clusters sit at their mass-weighted value.
  d.support.resize(first.size());
  for (std::size_t j = 0; j < first.size(); ++j) d.support[j] = d.masses[j] > 0.0 ? moment[j] / d.masses[j] : first[j];
  return d;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace allocgen

namespace allocgen {

std::size_t count_cdf_crossings(const ConditionalMeanDistribution& a, const ConditionalMeanDistribution& b,
                                double eps) {
  std::vector<double> xs = a.support;
  xs.insert(xs.end(), b.support.begin(), b.support.end());
  std::sort(xs.begin(), xs.end());
  std::size_t ia = 0, ib = 0, changes = 0;
  double ga = 0.0, gb = 0.0;
  int sign = 0;
  for (double x : xs) {
    while (ia < a.support.size() && a.support[ia] <= x) ga += a.masses[ia++];
    while (ib < b.support.size() && b.support[ib] <= x) gb += b.masses[ib++];
    const double d = ga - gb;
    if (std::abs(d) <= eps) continue;
    const int s = d > 0 ? 1 : -1;
    if (sign != 0 && s != sign) ++changes;
    sign = s;
  }
  return changes;
}

}  // namespace allocgen
