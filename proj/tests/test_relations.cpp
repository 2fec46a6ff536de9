#include <doctest.h>

#include <cmath>
#include <map>

#include "muspec/catalog.hpp"
#include "muspec/errors.hpp"
#include "muspec/relations.hpp"
#include "oracles.hpp"

using namespace muspec;

namespace {

const TimeDomain D = TimeDomain::Discrete;
const TimeDomain C = TimeDomain::Continuous;

GrowthRate rate(const std::string& name, TimeDomain dom = D) { return catalog_rate(name, dom); }
GrowthRate pe(double p, double l, TimeDomain dom = D) { return GrowthRate::power_exp(p, l, dom); }

double num(const nlohmann::json& j) { return j.get<double>(); }

std::vector<GrowthRate> grid_rates() {
  std::vector<GrowthRate> out;
  for (double p : {1.0, 2.0, 3.0}) {
    for (double l : {0.5, 1.0, 2.0}) out.push_back(pe(p, l));
  }
  out.push_back(GrowthRate::polynomial(D));
  return out;
}

bool holds(const RelationVerdict& v) { return v.outcome == Outcome::Holds; }

}  // namespace

TEST_CASE("faster: the catalog ladder") {
  CHECK(holds(check_faster(rate("q"), rate("exp"))));
  CHECK(holds(check_faster(rate("c"), rate("q"))));
  CHECK(holds(check_faster(rate("exp"), rate("p"))));
  const auto f = check_faster(rate("exp"), rate("q"));
  CHECK(f.outcome == Outcome::Fails);
  REQUIRE_FALSE(f.witness.empty());
  // The witness values grow window by window.
  for (std::size_t i = 1; i < f.witness.size(); ++i) CHECK(f.witness[i].value > f.witness[i - 1].value);
}

TEST_CASE("faster: certificates equal brute-force sups on the final window") {
  const auto v = check_faster(rate("q"), rate("exp"));
  REQUIRE(holds(v));
  const auto& env = v.certificate.at("envelopes");
  REQUIRE(env.size() == 5);
  for (const auto& e : env) {
    const double eps = num(e.at("epsilon"));
    const double ref = oracle::faster_sup(oracle::log_q, oracle::log_exp, eps, 400);
    CHECK(num(e.at("log_M")) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("faster: witnesses re-evaluate directly") {
  const auto v = check_faster(rate("exp"), rate("q"));
  REQUIRE(v.outcome == Outcome::Fails);
  const double eps = num(v.diagnostics.at("failing_epsilon"));
  for (const auto& w : v.witness) {
    CHECK(w.k >= w.n);
    const double direct = (oracle::log_q(w.k) - oracle::log_q(w.n)) - eps * (w.k - w.n);
    CHECK(w.value == doctest::Approx(direct));
  }
  // The last witness exceeds the previous window's sup by at least tol_stab.
  const auto& last = v.witness.back();
  const auto& prev = v.witness[v.witness.size() - 2];
  CHECK(last.value - prev.value >= 0.02);
}

TEST_CASE("weakly faster: powers of a rate") {
  const auto w2 = pe(2, 2);  // omega^2 with omega = q
  const auto v = check_weakly_faster(w2, rate("q"));
  REQUIRE(holds(v));
  CHECK(num(v.certificate.at("log_M")) == 0.0);
  const auto back = check_weakly_faster(rate("q"), w2);
  CHECK(back.outcome == Outcome::Fails);
  REQUIRE_FALSE(back.witness.empty());
  // Drawdown grows like (theta - 1) L_omega: compare with the oracle.
  CHECK(back.witness.back().value ==
        doctest::Approx(oracle::max_drawdown(oracle::log_q, oracle::log_power_exp(2, 2), 400)));
  const auto self = check_weakly_faster(rate("c"), rate("c"));
  REQUIRE(holds(self));
  CHECK(num(self.certificate.at("log_M")) == 0.0);
}

TEST_CASE("weakly faster: drawdown certificate matches the oracle") {
  // omega = exp with a bounded bump: finite drawdown.
  const auto omega = GrowthRate::expression("t + 0.5*t/(1+abs(t))", D);
  const auto v = check_weakly_faster(rate("exp"), omega);
  REQUIRE(holds(v));
  const double ref =
      oracle::max_drawdown(oracle::log_exp, [](double t) { return t + 0.5 * t / (1 + std::fabs(t)); }, 400);
  CHECK(num(v.certificate.at("log_M")) == doctest::Approx(ref).epsilon(1e-10));
  CHECK(num(v.certificate.at("m")) == doctest::Approx(std::exp(-ref)));
}

TEST_CASE("almost relations") {
  const auto e3 = pe(1, 3);
  CHECK(holds(check_almost(e3, rate("exp"), AlmostDirection::Faster)));
  CHECK(holds(check_almost(e3, rate("exp"), AlmostDirection::Slower)));
  CHECK(holds(check_almost(rate("exp"), e3, AlmostDirection::Faster)));
  CHECK(holds(check_almost(rate("exp"), e3, AlmostDirection::Slower)));
  CHECK(holds(check_almost(rate("q"), rate("exp"), AlmostDirection::Faster)));
  CHECK(check_almost(rate("p"), rate("c"), AlmostDirection::Slower).outcome == Outcome::Fails);
  CHECK(check_almost(rate("c"), rate("q"), AlmostDirection::Slower).outcome == Outcome::Holds);
  const auto pc = check_almost(rate("p"), rate("c"), AlmostDirection::Faster);
  CHECK(pc.outcome != Outcome::Holds);
}

TEST_CASE("equivalences of powers") {
  for (double theta : {2.0, 3.0}) {
    const auto omega = rate("exp");
    const auto mu = pe(1, theta);
    CHECK(holds(check_equivalent(omega, mu)));
    CHECK(check_weakly_equivalent(omega, mu).outcome == Outcome::Fails);
  }
  CHECK(holds(check_weakly_equivalent(rate("q"), rate("q"))));
  CHECK(holds(check_weakly_equivalent(rate("glued_c_p", C), rate("c", C))));
  CHECK(holds(check_equivalent(rate("glued_c_p", C), rate("c", C))));
}

TEST_CASE("classification and order") {
  const auto c = classify_pair(rate("p"), rate("exp"));
  CHECK(c.b_faster_a == Outcome::Holds);
  CHECK(c.a_faster_b == Outcome::Fails);
  CHECK(c.a_order_b == Outcome::Holds);
  CHECK(c.b_order_a == Outcome::Fails);
  CHECK(c.symbolic.has_value());
  CHECK(c.disagreements.empty());
  CHECK(holds(check_order(rate("p"), rate("exp"))));

  const auto g = classify_pair(rate("glued_c_p", C), rate("c", C));
  CHECK_FALSE(g.symbolic.has_value());
  CHECK(g.weakly_equivalent == Outcome::Holds);
}

TEST_CASE("chains") {
  const auto ok = chain_check({rate("p"), rate("exp"), rate("q"), rate("c")});
  CHECK(ok.outcome == Outcome::Holds);
  CHECK(ok.links.size() == 3);
  CHECK_FALSE(ok.first_failing_link.has_value());
  const auto bad = chain_check({rate("c"), rate("q")});
  CHECK(bad.outcome == Outcome::Fails);
  CHECK(bad.first_failing_link == 0u);
  CHECK(chain_check({rate("exp"), rate("exp")}).outcome == Outcome::Holds);
  const auto cont = chain_check({rate("p", C), rate("exp", C), rate("q", C), rate("c", C)});
  CHECK(cont.outcome == Outcome::Holds);
}

TEST_CASE("forward and backward formulations give identical verdicts") {
  for (TimeDomain dom : {D, C}) {
    std::vector<GrowthRate> rs;
    for (const auto& r : catalog_rates()) {
      if (dom == D && r.rate.kind() == GrowthRate::Kind::Glued) continue;
      rs.push_back(r.rate.in_domain(dom));
    }
    rs.push_back(pe(1, 3, dom));
    for (const auto& a : rs) {
      for (const auto& b : rs) {
        INFO(a.label() << " vs " << b.label());
        CHECK(check_faster(a, b).outcome == check_faster_backward(a, b).outcome);
      }
    }
  }
}

TEST_CASE("faster implies weakly faster implies almost faster") {
  const auto rs = grid_rates();
  for (const auto& a : rs) {
    for (const auto& b : rs) {
      INFO(a.label() << " vs " << b.label());
      if (holds(check_faster(a, b))) CHECK(holds(check_weakly_faster(a, b)));
      if (holds(check_weakly_faster(a, b))) CHECK(holds(check_almost(a, b, AlmostDirection::Faster)));
    }
  }
}

TEST_CASE("composition: omega << mu1 and mu1 <. mu2 give omega << mu2") {
  const auto rs = grid_rates();
  std::map<std::pair<std::size_t, std::size_t>, bool> fast, slow;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (std::size_t j = 0; j < rs.size(); ++j) {
      fast[{i, j}] = holds(check_faster(rs[i], rs[j]));
      slow[{i, j}] = holds(check_almost(rs[j], rs[i], AlmostDirection::Slower));  // rs[i] <. rs[j]
    }
  }
  int used = 0;
  for (std::size_t w = 0; w < rs.size(); ++w) {
    for (std::size_t m1 = 0; m1 < rs.size(); ++m1) {
      for (std::size_t m2 = 0; m2 < rs.size(); ++m2) {
        if (fast[{m1, w}] && slow[{m1, m2}]) {
          ++used;
          INFO(rs[w].label() << " " << rs[m1].label() << " " << rs[m2].label());
          CHECK(fast[{m2, w}]);
        }
      }
    }
  }
  CHECK(used > 0);
}

TEST_CASE("almost equivalent rates see the same faster families") {
  const auto rs = grid_rates();
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (std::size_t j = 0; j < rs.size(); ++j) {
      if (!holds(check_equivalent(rs[i], rs[j]))) continue;
      for (const auto& w : rs) {
        INFO(rs[i].label() << " ~~ " << rs[j].label() << " against " << w.label());
        CHECK(check_faster(w, rs[i]).outcome == check_faster(w, rs[j]).outcome);
        CHECK(check_faster(rs[i], w).outcome == check_faster(rs[j], w).outcome);
      }
    }
  }
}

TEST_CASE("~ and ~~ are equivalence relations on the grid") {
  const auto rs = grid_rates();
  const std::size_t n = rs.size();
  std::vector<std::vector<bool>> weq(n, std::vector<bool>(n)), eq(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      weq[i][j] = holds(check_weakly_equivalent(rs[i], rs[j]));
      eq[i][j] = holds(check_equivalent(rs[i], rs[j]));
    }
  }
  for (const auto* rel : {&weq, &eq}) {
    const auto& r = *rel;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(r[i][i]);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(r[i][j] == r[j][i]);
        for (std::size_t k = 0; k < n; ++k) {
          if (r[i][j] && r[j][k]) CHECK(r[i][k]);
        }
      }
    }
  }
}

TEST_CASE("relations reject mixed time domains and bad parameters") {
  CHECK_THROWS_AS(check_faster(rate("q", D), rate("exp", C)), ValidationError);
  RelationParams p;
  p.schedule = {100, 50};
  CHECK_THROWS_AS(check_faster(rate("q"), rate("exp"), p), ValidationError);
  RelationParams t;
  t.tol_stab = -1;
  CHECK_THROWS_AS(check_weakly_faster(rate("q"), rate("exp"), t), ValidationError);
}

TEST_CASE("verdict serialization") {
  const auto j = to_json(check_faster(rate("exp"), rate("q")));
  CHECK(j.at("relation") == "faster");
  CHECK(j.at("outcome") == "fails");
  CHECK(j.at("witness").is_array());
  CHECK(j.at("witness")[0].contains("n"));
  CHECK(j.at("witness")[0].contains("k"));
  CHECK(j.at("witness")[0].contains("value"));
  const auto h = to_json(check_faster(rate("q"), rate("exp")));
  CHECK(h.at("outcome") == "holds");
  CHECK(h.at("certificate").contains("envelopes"));
  CHECK(h.contains("grid"));
  const auto ch = to_json(chain_check({rate("p"), rate("exp")}));
  CHECK(ch.at("outcome") == "holds");
}
