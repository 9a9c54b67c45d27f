#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dshock/closed_forms.hpp"
#include "dshock/errors.hpp"
#include "dshock/laplace.hpp"
#include "dshock/simulator.hpp"
#include "oracles.hpp"

using namespace dshock;
using doctest::Approx;

namespace {

std::vector<ShockModel> models(int k) {
  return {
      ShockModel(k, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(std::numbers::ln2)),
      ShockModel(k, ArrivalLaw::uniform(0.0, 2.0), ThresholdLaw::constant(1.0)),
      ShockModel(k, ArrivalLaw::exponential(1.0), ThresholdLaw::exponential(0.5)),
      ShockModel(k, ArrivalLaw::exponential(2.0), ThresholdLaw::uniform(0.2, 1.0)),
      ShockModel(k, ArrivalLaw::uniform(0.5, 1.5), ThresholdLaw::exponential(1.0)),
      ShockModel(k, ArrivalLaw::uniform(0.0, 1.0), ThresholdLaw::uniform(0.25, 0.75)),
  };
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

}  // namespace

TEST_CASE("transform normalisation and bound") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> re(0.0, 4.0), im(-50.0, 50.0);
  for (int k : {1, 3}) {
    for (const auto& m : models(k)) {
      CHECK(std::abs(laplace_h(m, 0.0) - 1.0) < 1e-8);
      for (int i = 0; i < 25; ++i) CHECK(std::abs(laplace_h(m, Complex(re(gen), im(gen)))) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("transform matches the reduced exponential expression") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> re(0.0, 5.0), im(-40.0, 40.0);
  const double lambda = 1.4, tau = 0.6;
  for (int k : {1, 2, 5}) {
    const ShockModel m(k, ArrivalLaw::exponential(lambda), ThresholdLaw::constant(tau));
    for (int i = 0; i < 50; ++i) {
      const Complex s(re(gen), im(gen));
      const Complex a = lambda / (s + lambda);
      const Complex e = std::exp(-(s + lambda) * tau);
      const Complex expected = std::pow(a, k) * std::pow(1.0 - e, k) / std::pow(1.0 - a * e, k);
      CHECK(std::abs(laplace_h(m, s) - expected) < 1e-12);
    }
  }
}

TEST_CASE("transform matches the reduced uniform expression") {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> re(0.05, 5.0), im(-40.0, 40.0);
  const double a = 0.5, b = 2.5, tau = 1.2;
  for (int k : {1, 3}) {
    const ShockModel m(k, ArrivalLaw::uniform(a, b), ThresholdLaw::constant(tau));
    for (int i = 0; i < 50; ++i) {
      const Complex s(re(gen), im(gen));
      const Complex ratio = (std::exp(-s * a) - std::exp(-s * tau)) /
                            (s * (b - a) - std::exp(-s * tau) + std::exp(-s * b));
      CHECK(std::abs(laplace_h(m, s) - std::pow(ratio, k)) < 1e-11);
    }
  }
}

TEST_CASE("inversion self-test on a known pair") {
  const auto r = euler_inversion([](Complex s) { return 1.0 / (s + 1.0); }, 1.0);
  CHECK(r.value == Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(std::abs(r.value - std::exp(-1.0)) < 1e-8);
  CHECK(r.error_estimate < 1e-8);
  CHECK_THROWS_AS(euler_inversion([](Complex s) { return 1.0 / (s + 1.0); }, 0.0), DomainError);
}

TEST_CASE("inversion configuration is validated") {
  InversionConfig cfg;
  cfg.euler_depth = 7;
  CHECK_THROWS_AS(cfg.validate(), ModelError);
  cfg = InversionConfig{};
  cfg.target_error = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ModelError);
}

TEST_CASE("inverted density, exponential arrivals with a constant threshold") {
  const ShockModel m1(1, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(1.0));
  CHECK(std::abs(invert_density(m1, 0.5).value - std::exp(-0.5)) < 1e-8);
  CHECK(std::abs(invert_density(m1, 0.5).value - exp_const_pdf({1.0, 1.0, 1}, 0.5)) < 1e-8);

  const ShockModel m2 = m1.with_k(2);
  for (double t : linspace(0.1, 10.0 * failure_moments(m2).mean, 20)) {
    CHECK(std::abs(invert_density(m2, t).value - oracle::naive_exp_const_pdf(1.0, 1.0, 2, t)) < 1e-6);
  }
}

TEST_CASE("inverted density matches the series on 0.1 .. 10 E(W)") {
  for (double tau : {0.5, std::numbers::ln2, 1.0}) {
    for (int k : {1, 2, 3, 5}) {
      const ExpConstParams p{1.0, tau, k};
      const ShockModel m(k, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(tau));
      for (double t : linspace(0.1, 10.0 * exp_const_moments(p).mean, 20)) {
        CHECK(std::abs(invert_density(m, t).value - exp_const_pdf(p, t)) < 1e-6);
      }
    }
  }
}

TEST_CASE("inverted cdf") {
  const ShockModel m1(1, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(1.0));
  SUBCASE("vanishes near the origin") {
    for (int k : {1, 2, 5}) CHECK(invert_cdf(m1.with_k(k), 1e-6).value < 1e-5);
  }
  SUBCASE("k = 1 at the threshold equals P(Z <= tau), checked by simulation") {
    const double value = invert_cdf(m1, 1.0).value;
    CHECK(value == Approx(1.0 - std::exp(-1.0)).epsilon(1e-7));
    SimulationConfig cfg;
    cfg.runs = 1'000'000;
    cfg.seed = 3;
    const auto r = run_batch(m1, cfg);
    const double empirical = r.ecdf(1.0);
    CHECK(std::abs(empirical - value) < 3.0 * std::sqrt(value * (1.0 - value) / 1e6));
  }
  SUBCASE("99.9th empirical percentile") {
    const ShockModel m(3, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(std::numbers::ln2));
    SimulationConfig cfg;
    cfg.runs = 1'000'000;
    cfg.seed = 4;
    const auto r = run_batch(m, cfg);
    const double t999 = r.samples[static_cast<std::size_t>(0.999 * r.samples.size())];
    CHECK(std::abs(invert_cdf(m, t999).value - 0.999) < 2e-3);
  }
  SUBCASE("monotone on an increasing grid") {
    for (const auto& m : models(2)) {
      const double hi = failure_moments(m).mean * 4.0;
      double last = 0.0;
      for (double t : linspace(hi / 300.0, hi, 300)) {
        try {
          const double value = invert_cdf(m, t).value;
          CHECK(value >= last - 1e-8);
          last = value;
        } catch (const InversionError&) {
          // points right at a kink of the cdf may not converge; that is reported, not hidden
        }
      }
    }
  }
}

TEST_CASE("inverted density integrates to one") {
  for (const auto& m : models(2)) {
    const auto mom = failure_moments(m);
    const double hi = mom.mean + 12.0 * std::sqrt(mom.variance);
    const int n = 4000;
    double sum = 0.0;
    double prev_t = 0.0, prev_f = 0.0;
    int failures = 0;
    for (int i = 1; i <= n; ++i) {
      const double t = hi * i / n;
      double f = prev_f;
      try {
        f = invert_density(m, t).value;
      } catch (const InversionError&) {
        ++failures;
      }
      sum += 0.5 * (f + prev_f) * (t - prev_t);
      prev_t = t;
      prev_f = f;
    }
    CHECK(failures < 40);
    CHECK(sum == Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("at a jump of the density the inversion gives the midpoint") {
  const ShockModel m(1, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(1.0));
  // h(1-) = e^-1 and h(1+) = 0
  const auto r = invert_density(m, 1.0);
  CHECK(std::abs(r.value - 0.5 * std::exp(-1.0)) <= r.error_estimate);
  CHECK(r.error_estimate < 1e-8);
}

TEST_CASE("non-convergence is reported with the achieved error") {
  const ShockModel m(1, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(1.0));
  InversionConfig cfg;
  cfg.max_terms = 64;
  // close to the jump at tau the series needs far more terms than allowed
  try {
    (void)invert_density(m, 0.99, cfg);
    FAIL("expected the inversion to stop short of the target");
  } catch (const InversionError& e) {
    CHECK(e.achieved_error() > cfg.target_error);
    CHECK(std::string(e.what()).find("did not converge") != std::string::npos);
  }
  // a looser target reached through relaxation
  bool relaxed = false;
  const auto r = invert_relaxed([&](const InversionConfig& c) { return invert_density(m, 0.97, c); },
                                InversionConfig{}, 1e-5, &relaxed);
  CHECK(relaxed);
  CHECK(std::abs(r.value - std::exp(-0.97)) <= r.error_estimate);
  CHECK_THROWS_AS(invert_relaxed([&](const InversionConfig& c) { return invert_density(m, 0.99, c); }, cfg,
                                 1e-6),
                  InversionError);
}

TEST_CASE("moments from the transform") {
  const ShockModel m3(3, ArrivalLaw::exponential(1.0), ThresholdLaw::constant(std::numbers::ln2));
  CHECK(std::abs(moments_from_transform(m3).mean - 6.0) < 1e-5);

  const ShockModel u(1, ArrivalLaw::uniform(0.0, 2.0), ThresholdLaw::constant(1.0));
  CHECK(std::abs(moments_from_transform(u).variance - 14.0 / 3.0) < 1e-4);

  for (const auto& m : models(1)) {
    const auto one = moments_from_transform(m);
    const auto two = moments_from_transform(m.with_k(2));
    CHECK(std::abs(two.mean - 2.0 * one.mean) < 1e-8);
  }
}

TEST_CASE("moments from the transform agree with the raw-moment formula for every pair") {
  for (int k : {1, 4}) {
    for (const auto& m : models(k)) {
      const auto t = moments_from_transform(m);
      const auto g = failure_moments(m);
      CHECK(t.mean == Approx(g.mean).epsilon(1e-5));
      CHECK(t.variance == Approx(g.variance).epsilon(1e-5));
    }
  }
}
