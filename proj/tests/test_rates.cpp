#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "muspec/catalog.hpp"
#include "muspec/errors.hpp"
#include "muspec/rates.hpp"
#include "muspec/relations.hpp"
#include "oracles.hpp"

using namespace muspec;

namespace {
const TimeDomain D = TimeDomain::Discrete;
const TimeDomain C = TimeDomain::Continuous;
}  // namespace

TEST_CASE("log rates of the catalog families match their formulas") {
  const auto q = GrowthRate::power_exp(2, 1, D);
  const auto c = GrowthRate::power_exp(3, 1, D);
  const auto e = GrowthRate::power_exp(1, 1, D);
  CHECK(q.log_rate(0) == 0.0);
  CHECK(q.log_rate(3) == 9.0);
  CHECK(c.log_rate(-2) == -8.0);
  for (double t = -20; t <= 20; t += 1) {
    CHECK(q.log_rate(t) == doctest::Approx(oracle::log_q(t)));
    CHECK(c.log_rate(t) == doctest::Approx(oracle::log_c(t)));
    CHECK(e.log_rate(t) == oracle::log_exp(t));
    CHECK(GrowthRate::polynomial(D).log_rate(t) == doctest::Approx(oracle::log_p_disc(t)));
  }
  for (double t = -7.3; t <= 7.3; t += 0.61) {
    CHECK(GrowthRate::polynomial(C).log_rate(t) == doctest::Approx(oracle::log_p_cont(t)));
    CHECK(GrowthRate::power_exp(1.5, 0.5, C).log_rate(t) ==
          doctest::Approx(oracle::log_power_exp(1.5, 0.5)(t)));
  }
  CHECK(GrowthRate::polynomial(D).log_rate(0) == 0.0);
  CHECK(GrowthRate::expression("sgn(t)*abs(t)^2", D).log_rate(-4) == -16.0);
}

TEST_CASE("log quotients") {
  const auto q = GrowthRate::power_exp(2, 1, D);
  const auto lq = log_quotient(q, 3, 1);
  CHECK(lq.value == 8.0);
  CHECK(lq.to == 3);
  CHECK(lq.from == 1);
  CHECK(log_quotient(GrowthRate::power_exp(1, 1, D), 5, 2).value == 3.0);
  for (const auto& r : catalog_rates()) {
    CHECK(log_quotient(r.rate, 2.5, 2.5).value == 0.0);
  }
}

TEST_CASE("expression rates report domain errors with the offending time") {
  const auto r = GrowthRate::expression("log(t)", D);
  try {
    r.log_rate(-3);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.input() == -3);
  }
}

TEST_CASE("validate_rate") {
  const auto q = validate_rate(GrowthRate::power_exp(2, 1, D), 100);
  CHECK(q.ok());
  CHECK(q.range_lo == -10000.0);
  CHECK(q.range_hi == 10000.0);
  CHECK(validate_rate(GrowthRate::expression("sgn(t)*abs(t)^2", D), 50).ok());
  const auto dec = validate_rate(GrowthRate::expression("-t", D), 10);
  CHECK(dec.violations.size() == 20);
  const auto shifted = validate_rate(GrowthRate::expression("t+1", D), 10);
  CHECK_FALSE(shifted.origin_ok);
  CHECK(shifted.violations.empty());
  const auto bad = validate_rate(GrowthRate::expression("log(t)", C), 2);
  CHECK(bad.evaluation_error.has_value());
  CHECK_FALSE(bad.ok());
  // Continuous grid density is configurable.
  const auto fine = validate_rate(GrowthRate::expression("-t", C), 1, 20);
  CHECK(fine.violations.size() == 40);
  CHECK_THROWS_AS(validate_rate(GrowthRate::power_exp(2, 1, D), 0), ValidationError);
}

TEST_CASE("catalog rates are valid growth rates with unbounded logs") {
  for (TimeDomain dom : {D, C}) {
    for (const auto& r : catalog_rates()) {
      if (dom == D && r.rate.kind() == GrowthRate::Kind::Glued) continue;
      const auto rate = catalog_rate(r.name, dom);
      INFO(r.name);
      const auto v = validate_rate(rate, 40);
      CHECK(v.ok());
      CHECK(v.range_hi > 3.0);
      CHECK(v.range_lo < -3.0);
    }
  }
  CHECK_THROWS_AS(catalog_rate("glued_c_p", D), ValidationError);
  CHECK_THROWS_AS(catalog_rate("nope", D), ValidationError);
}

TEST_CASE("log quotients are monotone and antisymmetric on every catalog rate") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> t(-30.0, 30.0);
  for (const auto& r : catalog_rates()) {
    for (int i = 0; i < 300; ++i) {
      const double a = t(rng);
      const double b = t(rng);
      const double k = std::max(a, b);
      const double n = std::min(a, b);
      CHECK(log_quotient(r.rate, k, n).value >= 0.0);
      CHECK(log_quotient(r.rate, k, n).value == -log_quotient(r.rate, n, k).value);
    }
  }
}

TEST_CASE("glued rate crossover and pieces") {
  const auto g = catalog_rate("glued_c_p", C);
  REQUIRE(g.kind() == GrowthRate::Kind::Glued);
  const double a = g.crossover();
  // Root of log(1+a) = a^3, computed by plain bisection here.
  double lo = 0.1, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::log1p(mid) - mid * mid * mid > 0 ? lo : hi) = mid;
  }
  CHECK(a == doctest::Approx(lo).epsilon(1e-9));
  CHECK(a == doctest::Approx(0.850651).epsilon(1e-5));
  CHECK(g.log_rate(0.5) == doctest::Approx(oracle::log_p_cont(0.5)));
  CHECK(g.log_rate(-0.5) == doctest::Approx(oracle::log_p_cont(-0.5)));
  CHECK(g.log_rate(2.0) == doctest::Approx(8.0));
  CHECK(g.log_rate(-3.0) == doctest::Approx(-27.0));
  const auto fixed = GrowthRate::glued(GrowthRate::polynomial(C), GrowthRate::power_exp(3, 1, C), 1.25);
  CHECK(fixed.crossover() == 1.25);
}

TEST_CASE("glued(c, p) is weakly equivalent to c") {
  const auto v = check_weakly_equivalent(catalog_rate("glued_c_p", C), catalog_rate("c", C));
  CHECK(v.outcome == Outcome::Holds);
}

TEST_CASE("symbolic comparisons") {
  const auto p = GrowthRate::polynomial(D);
  const auto e = GrowthRate::power_exp(1, 1, D);
  const auto q = GrowthRate::power_exp(2, 1, D);
  const auto e3 = GrowthRate::power_exp(1, 3, D);

  const auto qe = symbolic_compare(q, e);
  REQUIRE(qe);
  CHECK(qe->a_faster_b);
  CHECK_FALSE(qe->b_faster_a);

  const auto ep = symbolic_compare(e, p);
  REQUIRE(ep);
  CHECK(ep->a_faster_b);

  const auto e3e = symbolic_compare(e3, e);
  REQUIRE(e3e);
  CHECK(e3e->equivalent);
  CHECK_FALSE(e3e->weakly_equivalent);
  CHECK_FALSE(e3e->a_faster_b);
  CHECK_FALSE(e3e->b_faster_a);
  CHECK(e3e->a_weakly_faster_b);
  CHECK_FALSE(e3e->b_weakly_faster_a);

  CHECK_FALSE(symbolic_compare(GrowthRate::expression("t", D), e).has_value());
  CHECK_FALSE(symbolic_compare(catalog_rate("glued_c_p", C), catalog_rate("c", C)).has_value());
}

TEST_CASE("symbolic profile agrees with the numeric checker on the parameter grid") {
  std::vector<GrowthRate> rates;
  for (double p : {1.0, 2.0, 3.0}) {
    for (double l : {0.5, 1.0, 2.0, 3.0}) rates.push_back(GrowthRate::power_exp(p, l, D));
  }
  rates.push_back(GrowthRate::polynomial(D));
  for (const auto& a : rates) {
    for (const auto& b : rates) {
      const auto sym = symbolic_compare(a, b);
      REQUIRE(sym);
      const auto c = classify_pair(a, b);
      INFO(a.label() << " vs " << b.label());
      CHECK(c.disagreements.empty());
      auto agree = [](Outcome o, bool s) { return o == (s ? Outcome::Holds : Outcome::Fails); };
      CHECK(agree(c.a_faster_b, sym->a_faster_b));
      CHECK(agree(c.b_faster_a, sym->b_faster_a));
      CHECK(agree(c.a_weakly_faster_b, sym->a_weakly_faster_b));
      CHECK(agree(c.b_weakly_faster_a, sym->b_weakly_faster_a));
      CHECK(agree(c.a_almost_slower_b, sym->a_almost_slower_b));
      CHECK(agree(c.b_almost_slower_a, sym->b_almost_slower_a));
      CHECK(agree(c.weakly_equivalent, sym->weakly_equivalent));
      CHECK(agree(c.equivalent, sym->equivalent));
      // A finite window cannot refute every searched exponent when the
      // first rate is strictly slower; those directions may stay open.
      for (auto [o, s] : {std::pair{c.a_almost_faster_b, sym->a_almost_faster_b},
                          std::pair{c.b_almost_faster_a, sym->b_almost_faster_a}}) {
        if (o == Outcome::Inconclusive) {
          CHECK_FALSE(s);
        } else {
          CHECK(agree(o, s));
        }
      }
    }
  }
}

TEST_CASE("rates are usable from many threads at once") {
  const auto q = GrowthRate::expression("sgn(t)*t^2", D);
  std::vector<double> out(8, 0.0);
  std::vector<std::thread> pool;
  for (int i = 0; i < 8; ++i) {
    pool.emplace_back([&, i] {
      double s = 0;
      for (int t = -500; t <= 500; ++t) s += q.log_rate(t + i);
      out[i] = s;
    });
  }
  for (auto& th : pool) th.join();
  for (int i = 0; i < 8; ++i) {
    double s = 0;
    for (int t = -500; t <= 500; ++t) s += oracle::log_q(t + i);
    CHECK(out[i] == doctest::Approx(s));
  }
}
