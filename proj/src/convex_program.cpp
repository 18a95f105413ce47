#include "gridmarket/convex_program.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>

extern "C" {
#include "ecos.h"
}

namespace gridmarket::opt {

AffineExpr AffineExpr::variable(std::size_t index, double coef) {
  AffineExpr e;
  e.terms_.push_back({index, coef});
  return e;
}

AffineExpr& AffineExpr::add(std::size_t index, double coef) {
  if (coef != 0.0) terms_.push_back({index, coef});
  return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  constant_ += other.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
  for (const auto& t : other.terms_) terms_.push_back({t.index, -t.coef});
  constant_ -= other.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  for (auto& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

AffineExpr& AffineExpr::compact() {
  std::map<std::size_t, double> merged;
  for (const auto& t : terms_) merged[t.index] += t.coef;
  terms_.clear();
  for (const auto& [i, c] : merged)
    if (c != 0.0) terms_.push_back({i, c});
  return *this;
}

double AffineExpr::evaluate(const std::vector<double>& x) const {
  double v = constant_;
  for (const auto& t : terms_) v += t.coef * x.at(t.index);
  return v;
}

std::size_t AffineExpr::max_index() const {
  std::size_t m = 0;
  for (const auto& t : terms_) m = std::max(m, t.index);
  return m;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
AffineExpr operator-(AffineExpr a) { return a *= -1.0; }

std::string to_string(Status status) {
  switch (status) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::unbounded:
      return "unbounded";
    case Status::numeric_failure:
      return "numeric-failure";
  }
  return "unknown";
}

std::vector<double> Solution::value(const VarBlock& block) const {
  std::vector<double> out(block.size);
  for (std::size_t i = 0; i < block.size; ++i) out[i] = x.at(block[i]);
  return out;
}

VarBlock ConvexProgram::add_variable(const std::string& name, std::size_t dim, double lower, double upper) {
  if (dim == 0) throw std::invalid_argument("variable '" + name + "' has zero dimension");
  if (lower > upper) throw std::invalid_argument("variable '" + name + "' has lower > upper");
  VarBlock block{num_vars_, dim};
  variables_.push_back({name, block, lower, upper});
  num_vars_ += dim;
  return block;
}

void ConvexProgram::check(const AffineExpr& expr) const {
  for (const auto& t : expr.terms()) {
    if (t.index >= num_vars_)
      throw std::out_of_range("unknown variable index " + std::to_string(t.index) + " (program has " +
                              std::to_string(num_vars_) + " variables)");
    if (!std::isfinite(t.coef)) throw std::invalid_argument("non-finite coefficient");
  }
  if (!std::isfinite(expr.constant())) throw std::invalid_argument("non-finite constant");
}

void ConvexProgram::add_affine_eq(AffineExpr expr, double rhs, std::string label) {
  expr += -rhs;
  expr.compact();
  check(expr);
  equalities_.push_back({std::move(expr), std::move(label)});
}

void ConvexProgram::add_affine_ineq(AffineExpr expr, double rhs, std::string label) {
  expr += -rhs;
  expr.compact();
  check(expr);
  inequalities_.push_back({std::move(expr), std::move(label)});
}

namespace {

AffineExpr dense_row(const std::vector<std::size_t>& indices, const std::vector<double>& coefs) {
  if (indices.size() != coefs.size())
    throw std::invalid_argument("row length " + std::to_string(coefs.size()) + " does not match " +
                                std::to_string(indices.size()) + " variable indices");
  AffineExpr e;
  for (std::size_t i = 0; i < indices.size(); ++i) e.add(indices[i], coefs[i]);
  return e;
}

}  // namespace

void ConvexProgram::add_affine_eq(const std::vector<std::size_t>& indices, const std::vector<double>& coefs,
                                  double rhs, std::string label) {
  add_affine_eq(dense_row(indices, coefs), rhs, std::move(label));
}

void ConvexProgram::add_affine_ineq(const std::vector<std::size_t>& indices, const std::vector<double>& coefs,
                                    double rhs, std::string label) {
  add_affine_ineq(dense_row(indices, coefs), rhs, std::move(label));
}

void ConvexProgram::add_convex_quad(const std::vector<std::size_t>& indices,
                                    const std::vector<std::vector<double>>& factor, const std::vector<double>& offset,
                                    AffineExpr linear, std::string label) {
  if (!offset.empty() && offset.size() != factor.size())
    throw std::invalid_argument("quadratic offset length does not match factor rows");
  std::vector<AffineExpr> rows;
  for (std::size_t k = 0; k < factor.size(); ++k) {
    auto row = dense_row(indices, factor[k]);
    if (!offset.empty()) row += offset[k];
    rows.push_back(std::move(row));
  }
  add_convex_quad(std::move(rows), std::move(linear), std::move(label));
}

void ConvexProgram::add_convex_quad(std::vector<AffineExpr> factor_rows, AffineExpr linear, std::string label) {
  for (auto& r : factor_rows) {
    r.compact();
    check(r);
  }
  linear.compact();
  check(linear);
  quadratics_.push_back({std::move(factor_rows), std::move(linear), std::move(label)});
}

void ConvexProgram::add_soc(std::vector<AffineExpr> rows, AffineExpr bound, std::string label) {
  for (auto& r : rows) {
    r.compact();
    check(r);
  }
  bound.compact();
  check(bound);
  cones_.push_back({std::move(rows), std::move(bound), std::move(label)});
}

void ConvexProgram::set_objective(AffineExpr objective, Sense sense) {
  objective.compact();
  check(objective);
  objective_ = std::move(objective);
  sense_ = sense;
}

namespace {

double coef_norm(const AffineExpr& e) {
  double m = 0.0;
  for (const auto& t : e.terms()) m = std::max(m, std::abs(t.coef));
  return m;
}

double row_scale(const AffineExpr& e) {
  double m = coef_norm(e);
  return m > 0.0 ? m : 1.0;
}

// Cone rows for sum rows^2 + linear <= 0, as || (2 rows, w - 1) || <= w + 1
// with w = -linear.
SocConstraint quad_as_soc(const QuadConstraint& q) {
  SocConstraint soc;
  AffineExpr w = -q.linear;
  for (const auto& r : q.factor_rows) soc.rows.push_back(2.0 * r);
  soc.rows.push_back(w - AffineExpr(1.0));
  soc.bound = w + AffineExpr(1.0);
  for (auto& r : soc.rows) r.compact();
  soc.bound.compact();
  return soc;
}

double soc_scale(const SocConstraint& soc) {
  double m = coef_norm(soc.bound);
  for (const auto& r : soc.rows) m = std::max(m, coef_norm(r));
  return m > 0.0 ? m : 1.0;
}

double soc_violation(const SocConstraint& soc, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& r : soc.rows) {
    double v = r.evaluate(x);
    s += v * v;
  }
  return std::max(0.0, std::sqrt(s) - soc.bound.evaluate(x)) / soc_scale(soc);
}

}  // namespace

double ConvexProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (const auto& v : variables_) {
    for (std::size_t i = 0; i < v.block.size; ++i) {
      double xi = x.at(v.block[i]);
      if (std::isfinite(v.lower)) worst = std::max(worst, v.lower - xi);
      if (std::isfinite(v.upper)) worst = std::max(worst, xi - v.upper);
    }
  }
  for (const auto& row : equalities_) worst = std::max(worst, std::abs(row.expr.evaluate(x)) / row_scale(row.expr));
  for (const auto& row : inequalities_) worst = std::max(worst, row.expr.evaluate(x) / row_scale(row.expr));
  for (const auto& q : quadratics_) worst = std::max(worst, soc_violation(quad_as_soc(q), x));
  for (const auto& c : cones_) worst = std::max(worst, soc_violation(c, x));
  return worst;
}

void ConvexProgram::write_lp(std::ostream& out) const {
  auto name_of = [&](std::size_t index) {
    for (const auto& v : variables_) {
      if (index >= v.block.offset && index < v.block.offset + v.block.size)
        return v.name + "[" + std::to_string(index - v.block.offset) + "]";
    }
    return "x" + std::to_string(index);
  };
  auto write_expr = [&](const AffineExpr& e) {
    bool first = true;
    for (const auto& t : e.terms()) {
      out << (t.coef < 0 ? (first ? "-" : " - ") : (first ? "" : " + ")) << std::abs(t.coef) << ' '
          << name_of(t.index);
      first = false;
    }
    if (e.constant() != 0.0 || first) out << (e.constant() < 0 ? " - " : " + ") << std::abs(e.constant());
  };
  out.precision(12);
  out << "\\ gridmarket convex program: " << num_vars_ << " variables\n";
  out << (sense_ == Sense::minimize ? "Minimize\n" : "Maximize\n") << " obj: ";
  write_expr(objective_);
  out << "\nSubject To\n";
  std::size_t k = 0;
  for (const auto& row : equalities_) {
    out << " e" << k++ << (row.label.empty() ? "" : "_" + row.label) << ": ";
    write_expr(row.expr);
    out << " = 0\n";
  }
  k = 0;
  for (const auto& row : inequalities_) {
    out << " i" << k++ << (row.label.empty() ? "" : "_" + row.label) << ": ";
    write_expr(row.expr);
    out << " <= 0\n";
  }
  k = 0;
  for (const auto& q : quadratics_) {
    out << " q" << k++ << (q.label.empty() ? "" : "_" + q.label) << ": ";
    for (std::size_t r = 0; r < q.factor_rows.size(); ++r) {
      out << (r ? " + " : "") << "(";
      write_expr(q.factor_rows[r]);
      out << ")^2";
    }
    out << " + ";
    write_expr(q.linear);
    out << " <= 0\n";
  }
  k = 0;
  for (const auto& c : cones_) {
    out << " c" << k++ << (c.label.empty() ? "" : "_" + c.label) << ": norm(";
    for (std::size_t r = 0; r < c.rows.size(); ++r) {
      out << (r ? ", " : "");
      write_expr(c.rows[r]);
    }
    out << ") <= ";
    write_expr(c.bound);
    out << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : variables_) {
    out << " " << v.name << "[0.." << v.block.size - 1 << "]: ";
    out << (std::isfinite(v.lower) ? std::to_string(v.lower) : "-inf") << " <= x <= "
        << (std::isfinite(v.upper) ? std::to_string(v.upper) : "+inf") << "\n";
  }
  out << "End\n";
}

namespace {

// Column-wise triplet accumulator.
struct Triplets {
  std::vector<std::vector<std::pair<long, double>>> cols;
  explicit Triplets(std::size_t n) : cols(n) {}

  void add_row(long row, const AffineExpr& e, double scale) {
    for (const auto& t : e.terms()) cols[t.index].push_back({row, t.coef * scale});
  }

  void compress(std::vector<double>& values, std::vector<long>& rows, std::vector<long>& colptr) {
    colptr.assign(cols.size() + 1, 0);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      auto& col = cols[j];
      std::sort(col.begin(), col.end());
      for (std::size_t k = 0; k < col.size(); ++k) {
        if (k + 1 < col.size() && col[k + 1].first == col[k].first) {
          col[k + 1].second += col[k].second;
          continue;
        }
        rows.push_back(col[k].first);
        values.push_back(col[k].second);
      }
      colptr[j + 1] = static_cast<long>(rows.size());
    }
  }
};

}  // namespace

ConicForm to_conic_form(const ConvexProgram& program) {
  ConicForm f;
  f.n = program.num_variables();
  f.c.assign(f.n, 0.0);
  const double sign = program.sense() == Sense::maximize ? -1.0 : 1.0;
  for (const auto& t : program.objective().terms()) f.c[t.index] += sign * t.coef;
  f.c_offset = sign * program.objective().constant();

  Triplets A(f.n);
  long arow = 0;
  for (const auto& row : program.equalities()) {
    if (row.expr.terms().empty()) continue;  // constant rows are checked after the solve
    double s = 1.0 / row_scale(row.expr);
    A.add_row(arow++, row.expr, s);
    f.b.push_back(-row.expr.constant() * s);
  }
  A.compress(f.A_values, f.A_rows, f.A_colptr);

  Triplets G(f.n);
  long grow = 0;
  for (const auto& v : program.variables()) {
    for (std::size_t i = 0; i < v.block.size; ++i) {
      if (std::isfinite(v.upper)) {
        G.add_row(grow++, AffineExpr::variable(v.block[i]), 1.0);
        f.h.push_back(v.upper);
      }
      if (std::isfinite(v.lower)) {
        G.add_row(grow++, AffineExpr::variable(v.block[i], -1.0), 1.0);
        f.h.push_back(-v.lower);
      }
    }
  }
  for (const auto& row : program.inequalities()) {
    if (row.expr.terms().empty()) continue;
    double s = 1.0 / row_scale(row.expr);
    G.add_row(grow++, row.expr, s);
    f.h.push_back(-row.expr.constant() * s);
  }
  f.linear_rows = static_cast<std::size_t>(grow);

  auto add_cone = [&](const SocConstraint& soc) {
    double s = 1.0 / soc_scale(soc);
    // h - G x = (bound, rows...) => G = -coef, h = constant.
    G.add_row(grow++, -soc.bound, s);
    f.h.push_back(soc.bound.constant() * s);
    for (const auto& r : soc.rows) {
      G.add_row(grow++, -r, s);
      f.h.push_back(r.constant() * s);
    }
    f.cone_dims.push_back(static_cast<long>(soc.rows.size() + 1));
  };
  for (const auto& q : program.quadratics()) add_cone(quad_as_soc(q));
  for (const auto& c : program.cones()) add_cone(c);
  G.compress(f.G_values, f.G_rows, f.G_colptr);
  return f;
}

BackendResult EcosBackend::solve(const ConicForm& form) const {
  BackendResult result;
  // ECOS takes mutable pointers and equilibrates in place.
  auto G_values = form.G_values;
  std::vector<idxint> G_rows(form.G_rows.begin(), form.G_rows.end());
  std::vector<idxint> G_colptr(form.G_colptr.begin(), form.G_colptr.end());
  auto A_values = form.A_values;
  std::vector<idxint> A_rows(form.A_rows.begin(), form.A_rows.end());
  std::vector<idxint> A_colptr(form.A_colptr.begin(), form.A_colptr.end());
  auto c = form.c;
  auto h = form.h;
  auto b = form.b;
  std::vector<idxint> q(form.cone_dims.begin(), form.cone_dims.end());

  std::size_t linear_rows = form.linear_rows;
  if (h.empty()) {
    // ECOS needs at least one cone row; add 0 <= 1.
    h.push_back(1.0);
    linear_rows = 1;
  }
  const auto n = static_cast<idxint>(form.n);
  const auto m = static_cast<idxint>(h.size());
  const auto p = static_cast<idxint>(form.b.size());

  pwork* work = ECOS_setup(n, m, p, static_cast<idxint>(linear_rows), static_cast<idxint>(q.size()),
                           q.empty() ? nullptr : q.data(), 0, G_values.data(), G_colptr.data(), G_rows.data(),
                           p ? A_values.data() : nullptr, p ? A_colptr.data() : nullptr,
                           p ? A_rows.data() : nullptr, c.data(), h.data(), p ? b.data() : nullptr);
  if (!work) {
    result.status = Status::numeric_failure;
    result.exit_code = ECOS_FATAL;
    return result;
  }
  work->stgs->verbose = 0;
  work->stgs->maxit = 200;
  idxint flag = ECOS_solve(work);
  result.exit_code = static_cast<int>(flag);
  result.iterations = static_cast<int>(work->info->iter);
  switch (flag) {
    case ECOS_OPTIMAL:
    case ECOS_OPTIMAL + ECOS_INACC_OFFSET:
      result.status = Status::optimal;
      result.x.assign(work->x, work->x + form.n);
      break;
    case ECOS_PINF:
    case ECOS_PINF + ECOS_INACC_OFFSET:
      result.status = Status::infeasible;
      break;
    case ECOS_DINF:
    case ECOS_DINF + ECOS_INACC_OFFSET:
      result.status = Status::unbounded;
      break;
    default:
      result.status = Status::numeric_failure;
      break;
  }
  ECOS_cleanup(work, 0);
  return result;
}

std::unique_ptr<ConicBackend> make_backend(const std::string& name) {
  std::string chosen = name;
  if (chosen.empty()) {
    const char* env = std::getenv("GRIDMARKET_SOLVER");
    chosen = (env && *env) ? env : "ecos";
  }
  if (chosen == "ecos") return std::make_unique<EcosBackend>();
  throw BackendUnavailable("conic backend '" + chosen + "' is not available (built-in: ecos)");
}

Solution solve(const ConvexProgram& program, const ConicBackend& backend, double tol) {
  Solution sol;
  sol.stats.backend = backend.name();
  // Constant-only rows never reach the backend; check them up front.
  for (const auto& row : program.equalities()) {
    if (row.expr.terms().empty() && std::abs(row.expr.constant()) > tol) {
      sol.status = Status::infeasible;
      return sol;
    }
  }
  for (const auto& row : program.inequalities()) {
    if (row.expr.terms().empty() && row.expr.constant() > tol) {
      sol.status = Status::infeasible;
      return sol;
    }
  }
  auto form = to_conic_form(program);
  auto start = std::chrono::steady_clock::now();
  auto res = backend.solve(form);
  sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  sol.stats.iterations = res.iterations;
  sol.stats.backend_exit = res.exit_code;
  sol.status = res.status;
  if (res.status != Status::optimal) return sol;

  sol.max_violation = program.max_violation(res.x);
  if (!(sol.max_violation <= tol)) {
    sol.status = Status::numeric_failure;
    return sol;
  }
  sol.x = std::move(res.x);
  sol.objective = program.objective().evaluate(sol.x);
  return sol;
}

Solution solve(const ConvexProgram& program, double tol) { return solve(program, *make_backend(), tol); }

}  // namespace gridmarket::opt
