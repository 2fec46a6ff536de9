#include "muspec/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "muspec/errors.hpp"
#include "numfmt.hpp"

namespace muspec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

long as_index(double t) {
  if (!std::isfinite(t) || std::floor(t) != t) {
    throw ValidationError("time", "discrete systems need integer times, got " + format_real(t));
  }
  return static_cast<long>(t);
}

double op_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 1) return std::fabs(m(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

// Cheap rescaling used inside long products; normalize() fixes the final norm.
void rescale(ScaledMatrix& m) {
  const double f = m.unit.norm();
  if (f == 0.0 || !std::isfinite(f)) {
    if (f == 0.0) {
      m.log_norm = kNegInf;
      return;
    }
    throw NumericError("evolution operator overflowed during renormalization");
  }
  m.unit /= f;
  m.log_norm += std::log(f);
}

double simpson(const Expr& f, double a, double b) {
  return (b - a) / 6.0 * (f.eval(a) + 4.0 * f.eval(0.5 * (a + b)) + f.eval(b));
}

// Integral of f over the grid cell with index j (cells [jh,(j+1)h] for j >= 0,
// mirrored cells [-(j+1)h,-jh] on the negative side).
double cell(const Expr& f, double h, long j, int side) {
  if (side > 0) return simpson(f, j * h, (j + 1) * h);
  return simpson(f, -(j + 1) * h, -j * h);
}

// Splits |t| = m*h + r with grid snapping.
std::pair<long, double> split_grid(double a, double h) {
  const double q = a / h;
  long m = static_cast<long>(std::floor(q));
  if (q - m > 1.0 - 1e-9) ++m;
  const double node = m * h;
  if (std::fabs(a - node) <= 1e-9 * h) return {m, 0.0};
  return {m, a - node};
}

// Integral from 0 to t of f, accumulated cell by cell in a fixed order.
double integral_from_zero(const Expr& f, double t, double h) {
  if (t == 0.0) return 0.0;
  const int side = t > 0 ? 1 : -1;
  auto [m, rest] = split_grid(std::fabs(t), h);
  double sum = 0.0;
  for (long j = 0; j < m; ++j) sum += cell(f, h, j, side);
  if (rest > 0.0) {
    sum += side > 0 ? simpson(f, m * h, m * h + rest) : simpson(f, -(m * h + rest), -m * h);
  }
  return side * sum;
}

ScaledMatrix diagonal_scaled(const std::vector<double>& logs, const std::vector<int>& signs) {
  const std::size_t d = logs.size();
  double top = kNegInf;
  for (double l : logs) top = std::max(top, l);
  ScaledMatrix out;
  out.unit = Eigen::MatrixXd::Zero(d, d);
  out.log_norm = top;
  for (std::size_t i = 0; i < d; ++i) out.unit(i, i) = signs[i] * std::exp(logs[i] - top);
  return out;
}

ScaledMatrix discrete_factor(const LinearSystem& s, long k) {
  const std::size_t d = s.dimension();
  std::vector<Expr::LogAbs> cells(d * d);
  double top = kNegInf;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      cells[i * d + j] = s.coefficient_log_abs(i, j, static_cast<double>(k));
      if (cells[i * d + j].sign != 0) top = std::max(top, cells[i * d + j].log_abs);
    }
  }
  if (top == kNegInf) throw NumericError("A(" + std::to_string(k) + ") is singular");
  ScaledMatrix f;
  f.unit.resize(d, d);
  f.log_norm = top;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto& c = cells[i * d + j];
      f.unit(i, j) = c.sign == 0 ? 0.0 : c.sign * std::exp(c.log_abs - top);
    }
  }
  if (std::fabs(f.unit.fullPivLu().determinant()) <= 1e-300) {
    throw NumericError("A(" + std::to_string(k) + ") is singular");
  }
  return f;
}

ScaledMatrix inverse(const ScaledMatrix& m) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m.unit);
  if (!lu.isInvertible()) throw NumericError("evolution operator is not invertible");
  ScaledMatrix out;
  out.unit = lu.inverse();
  out.log_norm = -m.log_norm;
  out.normalize();
  return out;
}

ScaledMatrix rk4_forward(const LinearSystem& s, double from, double to, double h) {
  const std::size_t d = s.dimension();
  ScaledMatrix x = ScaledMatrix::identity(d);
  double t = from;
  while (t < to) {
    double next = (std::floor(t / h + 1e-9) + 1.0) * h;
    if (next > to - 1e-9 * h) next = to;
    const double dt = next - t;
    const Eigen::MatrixXd a0 = s.coefficient(t);
    const Eigen::MatrixXd am = s.coefficient(t + 0.5 * dt);
    const Eigen::MatrixXd a1 = s.coefficient(next);
    const Eigen::MatrixXd& u = x.unit;
    const Eigen::MatrixXd k1 = a0 * u;
    const Eigen::MatrixXd k2 = am * (u + 0.5 * dt * k1);
    const Eigen::MatrixXd k3 = am * (u + 0.5 * dt * k2);
    const Eigen::MatrixXd k4 = a1 * (u + dt * k3);
    x.unit = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rescale(x);
    t = next;
  }
  x.normalize();
  return x;
}

}  // namespace

const char* structure_name(Structure s) {
  switch (s) {
    case Structure::Scalar: return "scalar";
    case Structure::Diagonal: return "diagonal";
    case Structure::Full: return "full";
  }
  return "?";
}

ScaledMatrix ScaledMatrix::identity(std::size_t d) {
  return {Eigen::MatrixXd::Identity(d, d), 0.0};
}

void ScaledMatrix::normalize() {
  const double n = op_norm(unit);
  if (n == 0.0) {
    log_norm = kNegInf;
    return;
  }
  if (!std::isfinite(n)) throw NumericError("matrix norm is not finite");
  unit /= n;
  log_norm += std::log(n);
}

Eigen::MatrixXd ScaledMatrix::value() const { return std::exp(log_norm) * unit; }

ScaledMatrix operator*(const ScaledMatrix& a, const ScaledMatrix& b) {
  ScaledMatrix out{a.unit * b.unit, a.log_norm + b.log_norm};
  out.normalize();
  return out;
}

NormBounds operator_norm_bounds(const ScaledMatrix& m) {
  if (m.unit.size() == 1) {
    const double v = std::fabs(m.unit(0, 0));
    const double l = v == 0.0 ? kNegInf : m.log_norm + std::log(v);
    return {l, l};
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.unit);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  return {smax == 0.0 ? kNegInf : m.log_norm + std::log(smax),
          smin <= 1e-300 * std::max(smax, 1e-300) ? kNegInf : m.log_norm + std::log(smin)};
}

Potential Potential::from_expression(const std::string& text) {
  Potential p;
  p.expr = parse_expr(text);
  p.text = text;
  return p;
}

Potential Potential::from_rate(const GrowthRate& rate, double slope) {
  Potential p;
  p.rate = rate;
  p.slope = slope;
  return p;
}

double Potential::operator()(double t) const {
  if (expr) return expr->eval(t) - expr->eval(0.0);
  if (slope == 0.0) return 0.0;
  return slope * rate->log_rate(t);
}

Table load_table_csv(const std::string& path, std::size_t dimension, Structure structure) {
  std::ifstream in(path);
  if (!in) throw ValidationError("coefficients.table", "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("coefficients.table", "empty table");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      out.push_back(cell);
    }
    return out;
  };
  const auto header = split(line);
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t i = 0; i < dimension; ++i) {
    for (std::size_t j = 0; j < dimension; ++j) {
      if (structure != Structure::Full && i != j) continue;
      slots.emplace_back(i, j);
    }
  }
  if (header.size() != slots.size() + 1 || header[0] != "k") {
    throw ValidationError("coefficients.table", "header must be k followed by " +
                                                    std::to_string(slots.size()) + " entries");
  }
  for (std::size_t c = 0; c < slots.size(); ++c) {
    const std::string want =
        "a_" + std::to_string(slots[c].first + 1) + "_" + std::to_string(slots[c].second + 1);
    if (header[c + 1] != want) {
      throw ValidationError("coefficients.table", "column " + std::to_string(c + 2) +
                                                      " must be " + want + ", got " + header[c + 1]);
    }
  }
  Table table;
  table.source = path;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    const std::string where = "coefficients.table row " + std::to_string(row);
    if (cells.size() != header.size()) throw ValidationError(where, "wrong number of columns");
    std::vector<double> vals;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || *end != '\0' || !std::isfinite(v)) {
        throw ValidationError(where, "not a decimal number: '" + c + "'");
      }
      vals.push_back(v);
    }
    if (std::floor(vals[0]) != vals[0]) throw ValidationError(where, "k must be an integer");
    const long k = static_cast<long>(vals[0]);
    if (table.matrices.empty()) {
      table.first = k;
    } else if (k != table.last() + 1) {
      throw ValidationError(where, "k must increase by one per row");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dimension, dimension);
    for (std::size_t c = 0; c < slots.size(); ++c) m(slots[c].first, slots[c].second) = vals[c + 1];
    table.matrices.push_back(std::move(m));
  }
  if (table.matrices.empty()) throw ValidationError("coefficients.table", "no data rows");
  return table;
}

LinearSystem LinearSystem::scalar(const std::string& coefficient, TimeDomain domain) {
  LinearSystem s = diagonal({coefficient}, domain);
  s.structure_ = Structure::Scalar;
  return s;
}

LinearSystem LinearSystem::diagonal(const std::vector<std::string>& coefficients,
                                    TimeDomain domain) {
  if (coefficients.empty() || coefficients.size() > 16) {
    throw ValidationError("coefficients.diagonal", "dimension must be between 1 and 16");
  }
  LinearSystem s;
  s.domain_ = domain;
  s.dimension_ = coefficients.size();
  s.structure_ = Structure::Diagonal;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    try {
      s.entries_.push_back({parse_expr(coefficients[i])});
    } catch (const SyntaxError& e) {
      throw ValidationError("coefficients.diagonal[" + std::to_string(i) + "]", e.what());
    }
    s.texts_.push_back({coefficients[i]});
  }
  return s;
}

LinearSystem LinearSystem::full(const std::vector<std::vector<std::string>>& entries,
                                TimeDomain domain) {
  const std::size_t d = entries.size();
  if (d == 0 || d > 16) throw ValidationError("coefficients.entries", "dimension must be between 1 and 16");
  LinearSystem s;
  s.domain_ = domain;
  s.dimension_ = d;
  s.structure_ = Structure::Full;
  for (std::size_t i = 0; i < d; ++i) {
    const std::string row_path = "coefficients.entries[" + std::to_string(i) + "]";
    if (entries[i].size() != d) throw ValidationError(row_path, "row length must equal the dimension");
    std::vector<Expr> row;
    for (std::size_t j = 0; j < d; ++j) {
      try {
        row.push_back(parse_expr(entries[i][j]));
      } catch (const SyntaxError& e) {
        throw ValidationError(row_path + "[" + std::to_string(j) + "]", e.what());
      }
    }
    s.entries_.push_back(std::move(row));
  }
  s.texts_ = entries;
  return s;
}

LinearSystem LinearSystem::tabulated(Table table, Structure structure) {
  if (table.matrices.empty()) throw ValidationError("coefficients.table", "no data rows");
  LinearSystem s;
  s.domain_ = TimeDomain::Discrete;
  s.dimension_ = static_cast<std::size_t>(table.matrices.front().rows());
  s.structure_ = structure;
  s.source_ = Source::Table;
  s.table_ = std::move(table);
  return s;
}

LinearSystem LinearSystem::closed_form(std::vector<Potential> components, TimeDomain domain) {
  if (components.empty() || components.size() > 16) {
    throw ValidationError("coefficients.potential", "dimension must be between 1 and 16");
  }
  LinearSystem s;
  s.domain_ = domain;
  s.dimension_ = components.size();
  s.structure_ = components.size() == 1 ? Structure::Scalar : Structure::Diagonal;
  s.source_ = Source::ClosedForm;
  s.potentials_ = std::move(components);
  return s;
}

LinearSystem LinearSystem::weighted(const GrowthRate& rate, double gamma) const {
  LinearSystem s = *this;
  s.weights_.emplace_back(rate, gamma);
  return s;
}

LinearSystem LinearSystem::without_weights() const {
  LinearSystem s = *this;
  s.weights_.clear();
  return s;
}

Expr::LogAbs LinearSystem::coefficient_log_abs(std::size_t i, std::size_t j, double t) const {
  if (source_ == Source::Table) {
    const long k = as_index(t);
    if (k < table_.first || k > table_.last()) {
      throw ValidationError("time", "k=" + std::to_string(k) + " outside the tabulated range [" +
                                        std::to_string(table_.first) + ", " +
                                        std::to_string(table_.last()) + "]");
    }
    const double v = table_.matrices[k - table_.first](i, j);
    if (v == 0.0) return {kNegInf, 0};
    return {std::log(std::fabs(v)), v > 0 ? 1 : -1};
  }
  if (source_ == Source::ClosedForm) throw ValidationError("coefficients", "closed-form systems have no coefficient matrix");
  if (structure_ != Structure::Full) {
    if (i != j) return {kNegInf, 0};
    return entries_[i][0].eval_log_abs(t);
  }
  return entries_[i][j].eval_log_abs(t);
}

Eigen::MatrixXd LinearSystem::coefficient(double t) const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dimension_, dimension_);
  if (source_ == Source::Table) {
    for (std::size_t i = 0; i < dimension_; ++i) {
      for (std::size_t j = 0; j < dimension_; ++j) {
        const auto la = coefficient_log_abs(i, j, t);
        a(i, j) = la.sign == 0 ? 0.0 : la.sign * std::exp(la.log_abs);
      }
    }
    return a;
  }
  if (source_ == Source::ClosedForm) throw ValidationError("coefficients", "closed-form systems have no coefficient matrix");
  for (std::size_t i = 0; i < dimension_; ++i) {
    if (structure_ != Structure::Full) {
      a(i, i) = entries_[i][0].eval(t);
      continue;
    }
    for (std::size_t j = 0; j < dimension_; ++j) a(i, j) = entries_[i][j].eval(t);
  }
  return a;
}

double LinearSystem::weight_log(double to, double from) const {
  double total = 0.0;
  for (const auto& [rate, gamma] : weights_) {
    if (gamma != 0.0) total += gamma * log_quotient(rate, to, from).value;
  }
  return total;
}

ScaledMatrix propagate(const LinearSystem& s, double to, double from, const EvolutionOptions& opt) {
  const std::size_t d = s.dimension();
  const bool discrete = s.time_domain() == TimeDomain::Discrete;
  if (discrete) {
    as_index(to);
    as_index(from);
  }
  if (to == from) return ScaledMatrix::identity(d);

  ScaledMatrix out;
  if (s.source() == LinearSystem::Source::ClosedForm) {
    std::vector<double> logs(d);
    for (std::size_t c = 0; c < d; ++c) logs[c] = s.potentials()[c](to) - s.potentials()[c](from);
    out = diagonal_scaled(logs, std::vector<int>(d, 1));
  } else if (s.is_diagonal()) {
    std::vector<double> logs(d, 0.0);
    std::vector<int> signs(d, 1);
    for (std::size_t c = 0; c < d; ++c) {
      if (discrete) {
        const long lo = std::min(as_index(to), as_index(from));
        const long hi = std::max(as_index(to), as_index(from));
        double sum = 0.0;
        for (long k = lo; k < hi; ++k) {
          const auto la = s.coefficient_log_abs(c, c, static_cast<double>(k));
          if (la.sign == 0) throw NumericError("A(" + std::to_string(k) + ") is singular");
          sum += la.log_abs;
          signs[c] *= la.sign;
        }
        logs[c] = to > from ? sum : -sum;
      } else {
        const Expr& f = s.entry_expr(c, 0);
        logs[c] = integral_from_zero(f, to, opt.step) - integral_from_zero(f, from, opt.step);
      }
    }
    out = diagonal_scaled(logs, signs);
  } else if (discrete) {
    const long k = as_index(to);
    const long n = as_index(from);
    out = ScaledMatrix::identity(d);
    if (k > n) {
      for (long j = n; j < k; ++j) {
        const ScaledMatrix f = discrete_factor(s, j);
        out.unit = f.unit * out.unit;
        out.log_norm += f.log_norm;
        rescale(out);
      }
    } else {
      for (long j = k; j < n; ++j) {
        const ScaledMatrix f = inverse(discrete_factor(s, j));
        out.unit = out.unit * f.unit;
        out.log_norm += f.log_norm;
        rescale(out);
      }
    }
    out.normalize();
  } else {
    out = to > from ? rk4_forward(s, from, to, opt.step) : inverse(rk4_forward(s, to, from, opt.step));
  }
  out.log_norm -= s.weight_log(to, from);
  return out;
}

ScaledMatrix weighted_propagate(const WeightedSystem& w, double to, double from,
                                const EvolutionOptions& options) {
  ScaledMatrix m = propagate(w.base, to, from, options);
  m.log_norm -= w.gamma * log_quotient(w.rate, to, from).value;
  return m;
}

std::vector<double> component_profile(const LinearSystem& s, std::size_t component,
                                      const std::vector<double>& times,
                                      const EvolutionOptions& opt) {
  if (!s.is_diagonal()) throw ValidationError("structure", "profiles need a scalar or diagonal system");
  if (component >= s.dimension()) throw ValidationError("component", "out of range");
  if (!std::is_sorted(times.begin(), times.end())) throw ValidationError("times", "must be sorted");
  std::vector<double> out(times.size(), 0.0);
  if (times.empty()) return out;

  if (s.source() == LinearSystem::Source::ClosedForm) {
    const Potential& pot = s.potentials()[component];
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = pot(times[i]);
  } else if (s.time_domain() == TimeDomain::Discrete) {
    const long lo = std::min(0L, as_index(times.front()));
    const long hi = std::max(0L, as_index(times.back()));
    // cum[k - lo] = F(k), F(0) = 0.
    std::vector<double> cum(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (long k = 1; k <= hi; ++k) {
      const auto la = s.coefficient_log_abs(component, component, static_cast<double>(k - 1));
      if (la.sign == 0) throw NumericError("A(" + std::to_string(k - 1) + ") is singular");
      cum[k - lo] = cum[k - 1 - lo] + la.log_abs;
    }
    for (long k = -1; k >= lo; --k) {
      const auto la = s.coefficient_log_abs(component, component, static_cast<double>(k));
      if (la.sign == 0) throw NumericError("A(" + std::to_string(k) + ") is singular");
      cum[k - lo] = cum[k + 1 - lo] - la.log_abs;
    }
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = cum[as_index(times[i]) - lo];
  } else {
    const Expr& f = s.entry_expr(component, 0);
    const double h = opt.step;
    auto cumulative = [&](double extent, int side) {
      const long m = split_grid(extent, h).first;
      std::vector<double> cum(static_cast<std::size_t>(m + 1), 0.0);
      for (long j = 0; j < m; ++j) cum[j + 1] = cum[j] + cell(f, h, j, side);
      return cum;
    };
    const auto pos = cumulative(std::max(0.0, times.back()), 1);
    const auto neg = cumulative(std::max(0.0, -times.front()), -1);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double t = times[i];
      if (t == 0.0) continue;
      const int side = t > 0 ? 1 : -1;
      auto [m, rest] = split_grid(std::fabs(t), h);
      double sum = (side > 0 ? pos : neg)[m];
      if (rest > 0.0) {
        sum += side > 0 ? simpson(f, m * h, m * h + rest) : simpson(f, -(m * h + rest), -m * h);
      }
      out[i] = side * sum;
    }
  }
  if (!s.weights().empty()) {
    for (std::size_t i = 0; i < times.size(); ++i) out[i] -= s.weight_log(times[i], 0.0);
  }
  return out;
}

}  // namespace muspec
