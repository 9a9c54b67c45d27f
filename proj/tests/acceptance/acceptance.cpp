// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "dshock/app/commands.hpp"
#include "dshock/closed_forms.hpp"
#include "dshock/gaussian_approx.hpp"
#include "dshock/laplace.hpp"
#include "dshock/simulator.hpp"
#include "oracles.hpp"

using namespace dshock;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

SimulationReport simulate(const ShockModel& m, std::uint64_t runs, std::uint64_t seed) {
  SimulationConfig cfg;
  cfg.runs = runs;
  cfg.seed = seed;
  cfg.workers = 4;
  return run_batch(m, cfg);
}

const ShockModel kBenchmark(3, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(std::numbers::ln2));

Outcome moment_agreement() {
  Outcome o;
  for (int k : {1, 3, 10}) {
    const auto m = kBenchmark.with_k(k);
    const auto general = failure_moments(m);
    const auto closed = exp_const_moments(*as_exp_const(m));
    const auto transform = moments_from_transform(m);
    const std::string at = " at k=" + std::to_string(k);
    for (const auto& [a, b, what] : {std::tuple{general, closed, "general vs closed"},
                                     std::tuple{general, transform, "general vs transform"},
                                     std::tuple{closed, transform, "closed vs transform"}}) {
      o.require(rel(a.mean, b.mean) <= 1e-5, std::string(what) + " mean" + at);
      o.require(rel(a.variance, b.variance) <= 1e-5, std::string(what) + " variance" + at);
    }
    if (k == 3) {
      o.require(std::abs(general.mean - 6.0) <= 1e-5 * 6.0, "mean at k=3 is " + num(general.mean));
      o.detail = o.detail.empty() ? "E(W|k=3) = " + num(general.mean) : o.detail;
    }
  }
  return o;
}

Outcome simulation_concordance() {
  Outcome o;
  const auto& m = kBenchmark;
  const auto analytic = failure_moments(m);
  const auto r = simulate(m, 1'000'000, 2024);
  const auto& w = r.failure_time;
  const double dm = (w.mean() - analytic.mean) / *w.mean_standard_error();
  const double dv = (*w.variance() - analytic.variance) / *w.variance_standard_error();
  o.require(std::abs(dm) <= 3.0, "mean off by " + num(dm) + " SE");
  o.require(std::abs(dv) <= 3.0, "variance off by " + num(dv) + " SE");
  double worst = 0.0;
  for (int n = m.k(); n <= m.k() + 10; ++n) {
    const double p = shock_count_pmf(m, n);
    const double z = (r.count_probability(n) - p) / std::sqrt(p * (1.0 - p) / 1e6);
    worst = std::max(worst, std::abs(z));
    o.require(std::abs(z) <= 3.0, "P(N=" + std::to_string(n) + ") off by " + num(z) + " SE");
  }
  if (o.pass) o.detail = "mean " + num(dm) + " SE, variance " + num(dv) + " SE, worst P(N=n) " + num(worst) + " SE";
  return o;
}

Outcome series_vs_inversion() {
  Outcome o;
  double worst = 0.0;
  for (int k : {1, 2, 5}) {
    const auto m = kBenchmark.with_k(k);
    const auto p = *as_exp_const(m);
    const double hi = 10.0 * exp_const_moments(p).mean;
    for (int i = 0; i < 20; ++i) {
      const double t = 0.1 + (hi - 0.1) * i / 19.0;
      try {
        const double d = std::abs(exp_const_pdf(p, t) - invert_density(m, t).value);
        worst = std::max(worst, d);
        o.require(d <= 1e-6, "k=" + std::to_string(k) + " t=" + num(t) + " differs by " + num(d));
      } catch (const InversionError& e) {
        o.require(false, "k=" + std::to_string(k) + " t=" + num(t) + ": " + e.what());
      }
    }
    // integrate the series piecewise between multiples of the threshold
    const auto mom = exp_const_moments(p);
    const double upper = mom.mean + 40.0 * std::sqrt(mom.variance);
    std::vector<double> edges{0.0};
    for (int j = 1; j * p.threshold < upper; ++j) edges.push_back(j * p.threshold);
    edges.push_back(upper);
    const double mass = oracle::simpson_pieces([&](double t) { return exp_const_pdf(p, t); }, edges, 40);
    o.require(std::abs(mass - 1.0) <= 1e-6, "k=" + std::to_string(k) + " mass " + num(mass));
  }
  if (o.pass) o.detail = "worst difference " + num(worst);
  return o;
}

Outcome single_lethal_shock() {
  Outcome o;
  const std::vector<ShockModel> models = {
      ShockModel(1, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(std::numbers::ln2)),
      ShockModel(1, ArrivalLaw::uniform(0.0, 2.0), ThresholdLaw::exponential(1.5)),
      ShockModel(1, ArrivalLaw::exponential(2.0), ThresholdLaw::uniform(0.1, 0.9)),
  };
  std::uint64_t seed = 400;
  for (const auto& m : models) {
    const double expected = m.arrivals().raw_moment(1) / m.lethal_prob();
    const double general = failure_moments(m).mean;
    const double transform = moments_from_transform(m).mean;
    const auto r = simulate(m, 1'000'000, seed++);
    const double z = (r.failure_time.mean() - expected) / *r.failure_time.mean_standard_error();
    o.require(rel(general, expected) <= 1e-9, "general mean " + num(general) + " vs " + num(expected));
    o.require(rel(transform, expected) <= 1e-5, "transform mean " + num(transform) + " vs " + num(expected));
    o.require(std::abs(z) <= 3.0, "simulated mean off by " + num(z) + " SE");
    o.detail += o.pass ? (o.detail.empty() ? "" : ", ") + num(expected) : "";
  }
  if (o.pass) o.detail = "E(Z)/p = " + o.detail;
  return o;
}

Outcome uniform_audit() {
  Outcome o;
  const UnifConstParams p{0.0, 2.0, 1.0, 1};
  const ShockModel m(1, ArrivalLaw::uniform(0.0, 2.0), ThresholdLaw::constant(1.0));
  o.require(std::abs(unif_const_mean(p) - 2.0) <= 1e-12, "formula mean " + num(unif_const_mean(p)));
  o.require(std::abs(failure_moments(m).mean - 2.0) <= 1e-12, "general mean " + num(failure_moments(m).mean));

  const auto r = simulate(m, 1'000'000, 77);
  const auto& w = r.failure_time;
  const double zm = (w.mean() - 2.0) / *w.mean_standard_error();
  const double zg = (*w.variance() - 14.0 / 3.0) / *w.variance_standard_error();
  const double zv = (*w.variance() - 7.0 / 3.0) / *w.variance_standard_error();
  o.require(std::abs(zm) <= 3.0, "simulated mean off by " + num(zm) + " SE");
  o.require(std::abs(unif_const_variance_general(p) - 14.0 / 3.0) <= 1e-12, "general variance");
  o.require(std::abs(zg) <= 3.0, "general variance off by " + num(zg) + " SE");
  o.require(std::abs(zv) > 3.0, "verbatim variance only " + num(zv) + " SE away");

  app::RunConfig cfg;
  cfg.model = {1, ArrivalLaw::uniform(0.0, 2.0), ThresholdLaw::constant(1.0)};
  cfg.runs = 1'000'000;
  cfg.seed = 77;
  cfg.workers = 4;
  cfg.formats = {};
  std::ostringstream log;
  const auto report = app::cmd_compare(cfg, log).report;
  const auto& flags = report["flags"];
  o.require(flags.size() == 1, std::to_string(flags.size()) + " flags in the compare report");
  if (flags.size() == 1) {
    o.require(flags[0]["method"] == "verbatim_uniform_formula" && flags[0]["quantity"] == "variance",
              "unexpected flag " + flags[0].dump());
  }
  for (const auto& row : report["methods"]) {
    if (!row["verdict"].is_null()) o.require(row["verdict"] == "PASS", row["method"].get<std::string>() + " failed");
  }
  if (o.pass) o.detail = "general variance " + num(zg) + " SE, verbatim " + num(zv) + " SE";
  return o;
}

Outcome normal_approximation() {
  Outcome o;
  double last = 1.0;
  std::string trail;
  for (int k : {1, 5, 20, 100}) {
    const auto m = kBenchmark.with_k(k);
    const double ks = approx_error(m, NormalApprox::from_moments(failure_moments(m)), ReferenceKind::inversion).ks;
    o.require(ks <= last, "KS rises at k=" + std::to_string(k));
    if (k == 100) o.require(ks < 0.05, "KS at k=100 is " + num(ks));
    last = ks;
    trail += (trail.empty() ? "" : ", ") + num(ks);
  }
  o.detail = (o.pass ? "KS " : o.detail + "; KS ") + trail;
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / ("dshock-acceptance-" + std::to_string(::getpid()));
  app::RunConfig cfg;
  cfg.model = {3, ArrivalLaw::uniform(0.0, 2.0), ThresholdLaw::exponential(0.8)};
  cfg.runs = 500'000;
  cfg.seed = 31337;
  std::ostringstream log;
  const auto run = [&](const std::string& name, unsigned workers) {
    cfg.directory = (base / name).string();
    cfg.workers = workers;
    (void)app::cmd_simulate(cfg, log);
  };
  run("a", 1);
  run("b", 1);
  run("c", 4);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  for (const char* file : {"simulation.json", "ecdf.csv"}) {
    const auto a = slurp(base / "a" / file);
    o.require(!a.empty(), std::string(file) + " missing");
    o.require(a == slurp(base / "b" / file), std::string(file) + " differs between identical runs");
    o.require(a == slurp(base / "c" / file), std::string(file) + " differs with 4 workers");
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  if (o.pass) o.detail = "simulation.json and ecdf.csv identical across 3 runs";
  return o;
}

Outcome conditional_gap_laws() {
  Outcome o;
  const ShockModel m(2, ArrivalLaw::exponential(1.0), ThresholdLaw::uniform(0.2, 1.0));
  constexpr std::size_t kGaps = 100'000;
  Stream stream(8, 0);
  std::vector<double> lethal, safe;
  while (lethal.size() < kGaps || safe.size() < kGaps) {
    simulate_path(m, stream, kDefaultGapCap, [&](double gap, bool is_lethal) {
      auto& bucket = is_lethal ? lethal : safe;
      if (bucket.size() < kGaps) bucket.push_back(gap);
    });
  }
  std::sort(lethal.begin(), lethal.end());
  std::sort(safe.begin(), safe.end());
  const double critical = ks_critical_value(kGaps, 0.01);
  const double d_lethal = ks_statistic(lethal, [&](double t) { return beta_cdf(m, t); });
  const double d_safe = ks_statistic(safe, [&](double t) { return alpha_cdf(m, t); });
  o.require(d_lethal < critical, "lethal gaps KS " + num(d_lethal));
  o.require(d_safe < critical, "non-lethal gaps KS " + num(d_safe));
  if (o.pass) o.detail = "KS " + num(d_lethal) + " and " + num(d_safe) + " against " + num(critical);
  return o;
}

struct Criterion {
  const char* name;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"moment triple agreement", 1.0, moment_agreement},
      {"simulation concordance", 10.0, simulation_concordance},
      {"series vs inversion", 5.0, series_vs_inversion},
      {"single lethal shock reduces to E(Z)/p", 0.0, single_lethal_shock},
      {"uniform variance audit", 0.0, uniform_audit},
      {"normal approximation", 30.0, normal_approximation},
      {"simulation determinism", 0.0, determinism},
      {"conditional gap laws", 0.0, conditional_gap_laws},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && seconds >= c.time_limit) {
      o.pass = false;
      o.detail += "; took " + num(seconds) + " s, limit " + num(c.time_limit) + " s";
    }
    if (!o.pass) ++failed;
    std::printf("%s  %d. %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", index, c.name, seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
