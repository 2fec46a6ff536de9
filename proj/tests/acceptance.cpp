// Acceptance run: one line per criterion, exit status 1 if any fails.
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "muspec/catalog.hpp"
#include "muspec/relations.hpp"
#include "muspec/spectrum.hpp"
#include "muspec/theorems.hpp"
#include "oracles.hpp"

using namespace muspec;

namespace {

const TimeDomain D = TimeDomain::Discrete;
const TimeDomain C = TimeDomain::Continuous;
const double kInf = std::numeric_limits<double>::infinity();

struct Result {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string show(const SpectrumReport& r) {
  std::string s = "{";
  for (std::size_t i = 0; i < r.intervals.size(); ++i) {
    if (i) s += ", ";
    s += "[" + fmt(r.intervals[i].lo) + "," + fmt(r.intervals[i].hi) + "]";
  }
  return s + "}";
}

SpectrumReport spec(const std::string& system, const std::string& rate) {
  const auto s = catalog_system(system);
  return compute_spectrum(s, catalog_rate(rate, s.time_domain()));
}

// Single interval with both endpoints within tol of v, from settled estimates.
bool point_within(const SpectrumReport& r, double v, double tol) {
  if (r.intervals.size() != 1 || !r.converged) return false;
  return std::fabs(r.intervals[0].lo - v) <= tol && std::fabs(r.intervals[0].hi - v) <= tol;
}

// Both endpoints of every component flagged divergent in one direction.
bool diverged(const SpectrumReport& r, Settle which) {
  if (r.components.empty()) return false;
  for (const auto& c : r.components) {
    if (c.upper.settle != which || c.lower.settle != which) return false;
  }
  const double v = which == Settle::DivergedUp ? kInf : -kInf;
  return r.intervals.size() == 1 && r.intervals[0].lo == v && r.intervals[0].hi == v;
}

void check_point(Result& res, const std::string& sys, const std::string& rate, double v, double tol) {
  const auto r = spec(sys, rate);
  res.detail << " " << rate << ":" << show(r);
  res.require(point_within(r, v, tol), sys + "/" + rate);
}

void check_up(Result& res, const std::string& sys, const std::string& rate) {
  const auto r = spec(sys, rate);
  res.detail << " " << rate << ":" << show(r);
  res.require(diverged(r, Settle::DivergedUp), sys + "/" + rate + " divergent-up");
}

Result criterion1() {
  Result res;
  const auto r = spec("abs2t", "q");
  res.detail << "abs2t q:" << show(r) << " converged=" << r.converged;
  res.require(r.converged, "converged");
  res.require(r.intervals.size() == 1, "single interval");
  if (r.intervals.size() == 1) {
    res.require(r.intervals[0].lo >= 0.95 && r.intervals[0].hi <= 1.05, "within [0.95,1.05]");
  }
  // The last window's raw statistics must already sit in the band.
  const auto& w = r.components.at(0).per_window.back();
  res.detail << " final window " << fmt(w.window) << ": [" << fmt(w.lower) << "," << fmt(w.upper) << "]";
  res.require(w.lower >= 0.95 && w.upper <= 1.05, "final window within [0.95,1.05]");
  return res;
}

Result criterion2() {
  Result res;
  res.detail << "abs2t";
  check_up(res, "abs2t", "exp");
  check_up(res, "abs2t", "p");
  return res;
}

Result criterion3() {
  Result res;
  res.detail << "abs2t";
  check_point(res, "abs2t", "c", 0.0, 0.05);
  return res;
}

Result criterion4() {
  Result res;
  res.detail << "inv1pt";
  check_point(res, "inv1pt", "p", 1.0, 0.05);
  for (const char* r : {"exp", "q", "c"}) check_point(res, "inv1pt", r, 0.0, 0.05);
  return res;
}

Result criterion5() {
  Result res;
  res.detail << "sq3t2";
  check_point(res, "sq3t2", "c", 1.0, 0.05);
  for (const char* r : {"p", "exp", "q"}) check_up(res, "sq3t2", r);
  return res;
}

Result criterion6() {
  Result res;
  res.detail << "disc_q";
  check_point(res, "disc_q", "q", 1.0, 0.02);
  check_up(res, "disc_q", "exp");
  return res;
}

Result criterion7() {
  Result res;
  const auto down = spec("frak_a", "exp");
  res.detail << "frak_a exp:" << show(down);
  res.require(diverged(down, Settle::DivergedDown), "exp divergent-down");
  const auto c = spec("frak_a", "c");
  res.detail << " c:" << show(c);
  res.require(point_within(c, -1.0, 0.02), "c within 0.02 of -1");
  // Independent oracle: telescope log|a(j)| = -3j^2-3j-1 and take the ratio
  // statistic against log c(t) = t^3 directly.
  const oracle::Fn log_a = [](double j) { return -3 * j * j - 3 * j - 1; };
  const oracle::Fn potential = [&](double t) { return oracle::telescoping(log_a, std::lround(t), 0); };
  const auto ref = oracle::ratio_range(potential, oracle::log_c, 60, 1.0, 0.5);
  res.detail << " oracle:[" << fmt(ref.lo) << "," << fmt(ref.hi) << "]";
  res.require(std::fabs(ref.lo + 1) < 1e-12 && std::fabs(ref.hi + 1) < 1e-12, "oracle is -1");
  if (c.intervals.size() == 1) {
    res.require(std::fabs(c.intervals[0].lo - ref.lo) <= 0.02 && std::fabs(c.intervals[0].hi - ref.hi) <= 0.02,
                "library matches oracle");
  }
  return res;
}

Result criterion8() {
  Result res;
  for (TimeDomain dom : {D, C}) {
    res.detail << (dom == D ? "discrete:" : " continuous:");
    for (auto [fast, slow] : {std::pair{"exp", "p"}, std::pair{"q", "exp"}, std::pair{"c", "q"}}) {
      const auto mu = catalog_rate(fast, dom);
      const auto omega = catalog_rate(slow, dom);
      const auto f = check_faster(mu, omega).outcome;
      const auto r = check_faster(omega, mu).outcome;
      res.detail << " " << fast << ">>" << slow << "=" << outcome_name(f) << "/" << outcome_name(r);
      res.require(f == Outcome::Holds, std::string(fast) + ">>" + slow);
      res.require(r == Outcome::Fails, std::string(slow) + ">>" + fast + " fails");
    }
    const auto chain = chain_check({catalog_rate("p", dom), catalog_rate("exp", dom), catalog_rate("q", dom),
                                    catalog_rate("c", dom)});
    res.detail << " chain=" << outcome_name(chain.outcome);
    res.require(chain.outcome == Outcome::Holds, "chain p,exp,q,c");
  }
  return res;
}

Result criterion9() {
  Result res;
  for (TimeDomain dom : {D, C}) {
    const auto omega = GrowthRate::power_exp(1, 1, dom);
    for (double theta : {2.0, 3.0}) {
      const auto mu = GrowthRate::power_exp(1, theta, dom);
      const auto weak = check_weakly_faster(mu, omega);
      const double log_m = weak.certificate.value("log_M", -1.0);
      const auto fast = check_faster(mu, omega).outcome;
      const auto almost_eq = check_equivalent(mu, omega).outcome;
      const auto weak_eq = check_weakly_equivalent(mu, omega).outcome;
      res.detail << (dom == D ? " D" : " C") << " theta=" << theta << ": >" << outcome_name(weak.outcome)
                 << " logM=" << fmt(log_m) << " >>" << outcome_name(fast) << " ~~" << outcome_name(almost_eq)
                 << " ~" << outcome_name(weak_eq);
      res.require(weak.outcome == Outcome::Holds && log_m == 0.0, "weakly faster with log M = 0");
      res.require(fast == Outcome::Fails, "faster fails");
      res.require(almost_eq == Outcome::Holds, "almost equivalent");
      res.require(weak_eq == Outcome::Fails, "not weakly equivalent");
    }
  }
  return res;
}

// |AB - C| / (|A| |B|) with the spectral norm.
double product_error(const ScaledMatrix& a, const ScaledMatrix& b, const ScaledMatrix& c) {
  const Eigen::MatrixXd cc = c.unit * std::exp(c.log_norm - a.log_norm - b.log_norm);
  const double na = a.unit.jacobiSvd().singularValues()(0);
  const double nb = b.unit.jacobiSvd().singularValues()(0);
  return (a.unit * b.unit - cc).jacobiSvd().singularValues()(0) / (na * nb);
}

Result criterion10() {
  Result res;
  const auto fixtures = harness_fixtures();

  // Cocycle identity.
  {
    std::mt19937 rng(10);
    std::uniform_int_distribution<long> dt(-8, 8);
    std::uniform_real_distribution<double> ct(-4.0, 4.0);
    double worst = 0.0;
    for (const auto& f : fixtures) {
      for (int i = 0; i < 8; ++i) {
        double t[3];
        for (double& x : t) x = f.system.time_domain() == D ? dt(rng) : std::round(ct(rng) * 100) / 100;
        worst = std::max(worst, product_error(propagate(f.system, t[0], t[1]), propagate(f.system, t[1], t[2]),
                                              propagate(f.system, t[0], t[2])));
      }
    }
    res.detail << "cocycle=" << fmt(worst);
    res.require(worst <= 1e-9, "cocycle");
  }

  // Weighting translates the spectrum.
  {
    std::mt19937 rng(1010);
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_real_distribution<double> slope(-2.0, 2.0);
    std::uniform_real_distribution<double> shift(-1.5, 1.5);
    std::uniform_int_distribution<int> dim(1, 3);
    const char* names[] = {"p", "exp", "q", "c"};
    int good = 0;
    for (int i = 0; i < 20; ++i) {
      const TimeDomain dom = i % 2 ? C : D;
      const auto nu = catalog_rate(names[pick(rng)], dom);
      std::vector<double> slopes;
      for (int j = dim(rng); j > 0; --j) slopes.push_back(std::round(slope(rng) * 100) / 100);
      const double g0 = std::round(shift(rng) * 100) / 100;
      const auto f = generate_quotient_system(nu, slopes);
      const auto base = compute_spectrum(f.system, nu);
      const auto moved = compute_spectrum(f.system.weighted(nu, g0), nu);
      const double tol = base.params.tol_stab;
      bool same = base.intervals.size() == moved.intervals.size();
      for (std::size_t k = 0; same && k < base.intervals.size(); ++k) {
        same = std::fabs(moved.intervals[k].lo - (base.intervals[k].lo - g0)) <= tol &&
               std::fabs(moved.intervals[k].hi - (base.intervals[k].hi - g0)) <= tol;
      }
      good += same;
    }
    res.detail << " translation=" << good << "/20";
    res.require(good == 20, "weighting translation");
  }

  // Gap ranks grow left to right on every diagonal fixture.
  {
    int spectra = 0;
    bool ordered = true;
    for (const auto& f : fixtures) {
      if (!f.system.is_diagonal()) continue;
      for (const auto& [name, r] : harness_rates(f.system.time_domain())) {
        const auto rep = compute_spectrum(f.system, r);
        ++spectra;
        for (std::size_t i = 1; i < rep.gaps.size(); ++i) {
          ordered = ordered && rep.gaps[i - 1].rank <= rep.gaps[i].rank;
        }
        for (const auto& g : rep.gaps) {
          ordered = ordered && g.rank >= 0 && g.rank <= static_cast<int>(f.system.dimension());
        }
      }
    }
    res.detail << " ranks-monotone=" << (ordered ? "yes" : "no") << "(" << spectra << " spectra)";
    res.require(ordered, "gap-rank monotonicity");
  }

  // Forward and backward formulations of faster agree.
  {
    int pairs = 0, agree = 0;
    for (TimeDomain dom : {D, C}) {
      std::vector<GrowthRate> rs;
      for (const auto& r : catalog_rates()) {
        if (dom == D && r.rate.kind() == GrowthRate::Kind::Glued) continue;
        rs.push_back(r.rate.in_domain(dom));
      }
      for (const auto& a : rs) {
        for (const auto& b : rs) {
          ++pairs;
          agree += check_faster(a, b).outcome == check_faster_backward(a, b).outcome;
        }
      }
    }
    res.detail << " duality=" << agree << "/" << pairs;
    res.require(agree == pairs, "duality");
  }

  // A mu-dichotomy and omega-bounded growth exclude each other when mu >> omega.
  {
    TheoremContext ctx;
    int dich = 0, growth = 0, broken = 0;
    for (const auto& f : fixtures) {
      const auto rates = harness_rates(f.system.time_domain());
      for (const auto& [mn, mu] : rates) {
        for (const auto& [on, omega] : rates) {
          if (ctx.faster(mu, omega).outcome != Outcome::Holds) continue;
          const auto& smu = ctx.spectrum(f.system, mu);
          const auto& som = ctx.spectrum(f.system, omega);
          if (has_mu_dichotomy(smu).verdict == Tri::True && som.converged) {
            ++dich;
            broken += has_mu_growth(som).outcome != GrowthOutcome::Fails;
          }
          if (has_mu_growth(som).outcome == GrowthOutcome::Holds) {
            ++growth;
            broken += has_mu_dichotomy(smu).verdict == Tri::True;
          }
        }
      }
    }
    res.detail << " exclusion=" << dich << "+" << growth << " cases, " << broken << " broken";
    res.require(broken == 0 && dich > 0 && growth > 0, "dichotomy/growth exclusion");
  }

  // Full theorem harness.
  {
    std::size_t pass = 0, fail = 0, skipped = 0;
    for (const auto& r : verify_all("all", fixtures)) {
      pass += r.status == TheoremStatus::Pass;
      fail += r.status == TheoremStatus::Fail;
      skipped += r.status == TheoremStatus::Skipped;
    }
    res.detail << " verify-all pass=" << pass << " fail=" << fail << " skipped=" << skipped;
    res.require(fail == 0 && pass > 0, "verify all");
  }
  return res;
}

}  // namespace

int main() {
  const std::vector<std::function<Result()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                      criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i]();
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail << "exception: " << e.what();
    }
    failed += !r.ok;
    std::printf("criterion %zu: %s  %s\n", i + 1, r.ok ? "pass" : "fail", r.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
