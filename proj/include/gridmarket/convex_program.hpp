#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gridmarket::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kFeasibilityTol = 1e-6;

/// Contiguous block of scalar variables registered in a ConvexProgram.
struct VarBlock {
  std::size_t offset = 0;
  std::size_t size = 0;

  std::size_t operator[](std::size_t i) const { return offset + i; }
};

/// Sparse affine expression sum_j coef_j * x_j + constant.
class AffineExpr {
 public:
  struct Term {
    std::size_t index;
    double coef;
  };

  AffineExpr() = default;
  AffineExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by design of the builder
  static AffineExpr variable(std::size_t index, double coef = 1.0);

  AffineExpr& add(std::size_t index, double coef);
  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double s);
  AffineExpr& operator+=(double c) {
    constant_ += c;
    return *this;
  }

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  /// Merges duplicate indices and drops exact zeros.
  AffineExpr& compact();
  double evaluate(const std::vector<double>& x) const;
  std::size_t max_index() const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator*(double s, AffineExpr a);
AffineExpr operator-(AffineExpr a);

enum class Sense { minimize, maximize };

/// || rows ||_2 <= bound, every entry affine.
struct SocConstraint {
  std::vector<AffineExpr> rows;
  AffineExpr bound;
  std::string label;
};

/// sum_k rows_k^2 + linear <= 0. The rows are an explicit factor F of the
/// PSD quadratic form, so convexity holds by construction.
struct QuadConstraint {
  std::vector<AffineExpr> factor_rows;
  AffineExpr linear;
  std::string label;
};

struct AffineRow {
  AffineExpr expr;  // == 0 or <= 0
  std::string label;
};

struct Variable {
  std::string name;
  VarBlock block;
  double lower = -kInf;
  double upper = kInf;
};

enum class Status { optimal, infeasible, unbounded, numeric_failure };
std::string to_string(Status status);

struct SolveStats {
  int iterations = 0;
  double seconds = 0.0;
  std::string backend;
  int backend_exit = 0;
};

struct Solution {
  Status status = Status::numeric_failure;
  std::vector<double> x;  // empty unless optimal
  double objective = 0.0;
  double max_violation = 0.0;  // recomputed here, after row normalization
  SolveStats stats;

  bool optimal() const { return status == Status::optimal; }
  double value(std::size_t index) const { return x.at(index); }
  std::vector<double> value(const VarBlock& block) const;
  double value(const AffineExpr& expr) const { return expr.evaluate(x); }
};

class ConvexProgram {
 public:
  VarBlock add_variable(const std::string& name, std::size_t dim, double lower = -kInf, double upper = kInf);
  /// expr == rhs
  void add_affine_eq(AffineExpr expr, double rhs = 0.0, std::string label = {});
  /// expr <= rhs
  void add_affine_ineq(AffineExpr expr, double rhs = 0.0, std::string label = {});
  /// Dense-row variants over an explicit index list; sizes must agree.
  void add_affine_eq(const std::vector<std::size_t>& indices, const std::vector<double>& coefs, double rhs,
                     std::string label = {});
  void add_affine_ineq(const std::vector<std::size_t>& indices, const std::vector<double>& coefs, double rhs,
                       std::string label = {});
  /// ||F x_idx + f||^2 + linear <= 0 with F given row-major (rows x indices.size()).
  void add_convex_quad(const std::vector<std::size_t>& indices, const std::vector<std::vector<double>>& factor,
                       const std::vector<double>& offset, AffineExpr linear, std::string label = {});
  void add_convex_quad(std::vector<AffineExpr> factor_rows, AffineExpr linear, std::string label = {});
  void add_soc(std::vector<AffineExpr> rows, AffineExpr bound, std::string label = {});
  void set_objective(AffineExpr objective, Sense sense);

  std::size_t num_variables() const { return num_vars_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<AffineRow>& equalities() const { return equalities_; }
  const std::vector<AffineRow>& inequalities() const { return inequalities_; }
  const std::vector<QuadConstraint>& quadratics() const { return quadratics_; }
  const std::vector<SocConstraint>& cones() const { return cones_; }
  const AffineExpr& objective() const { return objective_; }
  Sense sense() const { return sense_; }

  /// Largest constraint violation at x after scaling every row to unit
  /// infinity norm (variable bounds included).
  double max_violation(const std::vector<double>& x) const;

  /// LP-format-like text dump for external debugging.
  void write_lp(std::ostream& out) const;

 private:
  void check(const AffineExpr& expr) const;

  std::size_t num_vars_ = 0;
  std::vector<Variable> variables_;
  std::vector<AffineRow> equalities_;
  std::vector<AffineRow> inequalities_;
  std::vector<QuadConstraint> quadratics_;
  std::vector<SocConstraint> cones_;
  AffineExpr objective_;
  Sense sense_ = Sense::minimize;
};

/// Conic standard form handed to backends:
///   min c'x  s.t.  A x = b,  h - G x in K = R_+^l x Q^{q_1} x ... x Q^{q_k}
/// Matrices are compressed sparse column.
struct ConicForm {
  std::size_t n = 0;
  std::vector<double> c;
  double c_offset = 0.0;
  // equalities
  std::vector<double> A_values;
  std::vector<long> A_rows, A_colptr;
  std::vector<double> b;
  // cone rows
  std::vector<double> G_values;
  std::vector<long> G_rows, G_colptr;
  std::vector<double> h;
  std::size_t linear_rows = 0;
  std::vector<long> cone_dims;
};

/// Lowers a program to conic form: bounds and affine inequalities become
/// orthant rows, convex quadratics become rotated-cone rows, every row (or
/// cone block) is scaled to unit infinity norm. Maximization is negated.
ConicForm to_conic_form(const ConvexProgram& program);

struct BackendResult {
  Status status = Status::numeric_failure;
  std::vector<double> x;
  int iterations = 0;
  int exit_code = 0;
};

class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual BackendResult solve(const ConicForm& form) const = 0;
};

class EcosBackend final : public ConicBackend {
 public:
  std::string name() const override { return "ecos"; }
  BackendResult solve(const ConicForm& form) const override;
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backend by name; empty name reads GRIDMARKET_SOLVER (default "ecos").
std::unique_ptr<ConicBackend> make_backend(const std::string& name = {});

/// Solves and independently re-checks feasibility of the returned primal.
/// An "optimal" backend answer that violates a row by more than `tol` is
/// reported as numeric_failure.
Solution solve(const ConvexProgram& program, const ConicBackend& backend, double tol = kFeasibilityTol);
Solution solve(const ConvexProgram& program, double tol = kFeasibilityTol);

}  // namespace gridmarket::opt
