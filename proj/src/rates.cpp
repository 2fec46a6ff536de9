#include "muspec/rates.hpp"

#include <cmath>
#include <sstream>

#include "muspec/errors.hpp"
#include "numfmt.hpp"

namespace muspec {

namespace {

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(field, "must be a positive finite number");
  }
}

}  // namespace

const char* time_domain_name(TimeDomain d) {
  return d == TimeDomain::Discrete ? "discrete" : "continuous";
}

GrowthRate GrowthRate::power_exp(double p, double lambda, TimeDomain domain) {
  require_positive(p, "p");
  require_positive(lambda, "lambda");
  GrowthRate r;
  r.kind_ = Kind::PowerExp;
  r.domain_ = domain;
  r.p_ = p;
  r.lambda_ = lambda;
  return r;
}

GrowthRate GrowthRate::polynomial(TimeDomain domain) {
  GrowthRate r;
  r.kind_ = Kind::Polynomial;
  r.domain_ = domain;
  return r;
}

GrowthRate GrowthRate::expression(const std::string& log_rate, TimeDomain domain) {
  GrowthRate r;
  r.kind_ = Kind::Expression;
  r.domain_ = domain;
  r.expr_ = parse_expr(log_rate);
  r.text_ = log_rate;
  return r;
}

GrowthRate GrowthRate::glued(const GrowthRate& inner, const GrowthRate& outer,
                             std::optional<double> crossover, double search_window) {
  if (inner.time_domain() != outer.time_domain()) {
    throw ValidationError("outer", "inner and outer rates must share a time domain");
  }
  GrowthRate r;
  r.kind_ = Kind::Glued;
  r.domain_ = inner.time_domain();
  r.parts_ = std::make_shared<const std::pair<GrowthRate, GrowthRate>>(inner, outer);
  if (crossover) {
    require_positive(*crossover, "crossover");
    r.crossover_ = *crossover;
    return r;
  }
  auto diff = [&](double x) { return inner.log_rate(x) - outer.log_rate(x); };
  double lo = 1e-9;
  double hi = search_window;
  const double flo = diff(lo);
  const double fhi = diff(hi);
  if (flo == 0.0) {
    r.crossover_ = lo;
    return r;
  }
  if (sgn(flo) == sgn(fhi)) {
    throw ValidationError("crossover", "inner and outer rates do not cross on (0, " +
                                           format_real(search_window) + "]");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double fm = diff(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    (sgn(fm) == sgn(flo) ? lo : hi) = mid;
  }
  r.crossover_ = 0.5 * (lo + hi);
  return r;
}

GrowthRate GrowthRate::in_domain(TimeDomain domain) const {
  if (domain == domain_) return *this;
  GrowthRate r = *this;
  r.domain_ = domain;
  if (kind_ == Kind::Glued) {
    r.parts_ = std::make_shared<const std::pair<GrowthRate, GrowthRate>>(
        inner().in_domain(domain), outer().in_domain(domain));
  }
  return r;
}

double GrowthRate::log_rate(double t) const {
  switch (kind_) {
    case Kind::PowerExp:
      return lambda_ * sgn(t) * std::pow(std::fabs(t), p_);
    case Kind::Polynomial:
      if (domain_ == TimeDomain::Continuous) return sgn(t) * std::log1p(std::fabs(t));
      return t == 0.0 ? 0.0 : sgn(t) * std::log(std::fabs(t));
    case Kind::Expression:
      return expr_.eval(t);
    case Kind::Glued:
      return std::fabs(t) < crossover_ ? inner().log_rate(t) : outer().log_rate(t);
  }
  return 0.0;
}

std::optional<std::string> GrowthRate::log_rate_text() const {
  switch (kind_) {
    case Kind::PowerExp: {
      std::string s = "sgn(t)*abs(t)";
      if (p_ != 1.0) s += "^" + format_real(p_);
      if (lambda_ != 1.0) s = format_real(lambda_) + "*" + s;
      return s;
    }
    case Kind::Polynomial:
      if (domain_ == TimeDomain::Continuous) return "sgn(t)*log(1+abs(t))";
      return "sgn(t)*log(max(abs(t),1))";
    case Kind::Expression:
      return text_;
    case Kind::Glued:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string GrowthRate::label() const {
  switch (kind_) {
    case Kind::PowerExp:
      return "power_exp(p=" + format_real(p_) + ", lambda=" + format_real(lambda_) + ")";
    case Kind::Polynomial:
      return "polynomial";
    case Kind::Expression:
      return "expression(" + text_ + ")";
    case Kind::Glued:
      return "glued(" + inner().label() + ", " + outer().label() + ", " + format_real(crossover_) +
             ")";
  }
  return "?";
}

bool GrowthRate::operator==(const GrowthRate& o) const {
  if (kind_ != o.kind_ || domain_ != o.domain_) return false;
  switch (kind_) {
    case Kind::PowerExp:
      return p_ == o.p_ && lambda_ == o.lambda_;
    case Kind::Polynomial:
      return true;
    case Kind::Expression:
      return expr_ == o.expr_;
    case Kind::Glued:
      return crossover_ == o.crossover_ && inner() == o.inner() && outer() == o.outer();
  }
  return false;
}

LogQuotient log_quotient(const GrowthRate& rate, double to, double from) {
  if (to == from) return {0.0, to, from};
  return {rate.log_rate(to) - rate.log_rate(from), to, from};
}

RateValidation validate_rate(const GrowthRate& rate, double window, double samples_per_unit) {
  if (!(window > 0.0)) throw ValidationError("window", "must be positive");
  if (!(samples_per_unit > 0.0)) throw ValidationError("samples_per_unit", "must be positive");
  std::vector<double> ts;
  if (rate.time_domain() == TimeDomain::Discrete) {
    const long n = static_cast<long>(std::floor(window));
    for (long k = -n; k <= n; ++k) ts.push_back(static_cast<double>(k));
  } else {
    const long n = static_cast<long>(std::ceil(window * samples_per_unit));
    for (long i = -n; i <= n; ++i) ts.push_back(window * static_cast<double>(i) / n);
  }
  RateValidation out;
  std::vector<double> vals;
  vals.reserve(ts.size());
  for (double t : ts) {
    try {
      vals.push_back(rate.log_rate(t));
    } catch (const Error& e) {
      out.evaluation_error = e.what();
      return out;
    }
  }
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    if (vals[i + 1] < vals[i]) out.violations.emplace_back(ts[i], ts[i + 1]);
  }
  try {
    out.log_at_origin = rate.log_rate(0.0);
    out.origin_ok = std::fabs(out.log_at_origin) <= 1e-12;
  } catch (const Error& e) {
    out.evaluation_error = e.what();
    out.origin_ok = false;
  }
  if (!vals.empty()) {
    out.range_lo = vals.front();
    out.range_hi = vals.back();
  }
  return out;
}

std::optional<RelationProfile> symbolic_compare(const GrowthRate& a, const GrowthRate& b) {
  using K = GrowthRate::Kind;
  auto closed = [](const GrowthRate& r) { return r.kind() == K::PowerExp || r.kind() == K::Polynomial; };
  if (!closed(a) || !closed(b)) return std::nullopt;
  // Polynomial sits below every power-exponential family; give it order 0.
  const double pa = a.kind() == K::Polynomial ? 0.0 : a.p();
  const double pb = b.kind() == K::Polynomial ? 0.0 : b.p();
  const double la = a.kind() == K::Polynomial ? 1.0 : a.lambda();
  const double lb = b.kind() == K::Polynomial ? 1.0 : b.lambda();
  RelationProfile r;
  r.a_faster_b = pa > pb;
  r.b_faster_a = pb > pa;
  r.a_weakly_faster_b = pa > pb || (pa == pb && la >= lb);
  r.b_weakly_faster_a = pb > pa || (pa == pb && lb >= la);
  r.a_almost_faster_b = pa >= pb;
  r.b_almost_slower_a = pa >= pb;
  r.b_almost_faster_a = pb >= pa;
  r.a_almost_slower_b = pb >= pa;
  r.weakly_equivalent = pa == pb && la == lb;
  r.equivalent = pa == pb;
  return r;
}

}  // namespace muspec
