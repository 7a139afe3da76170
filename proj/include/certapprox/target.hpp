#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "certapprox/basis.hpp"
#include "certapprox/function.hpp"

namespace certapprox {

/// Grammar accepted by parse_expression, reproduced by the CLI help.
inline constexpr std::string_view kExpressionGrammar =
    "expr   := term (('+'|'-') term)*\n"
    "term   := factor (('*'|'/') factor)*\n"
    "factor := '-' factor | base ('^' factor)?\n"
    "base   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'\n"
    "func   := sin | cos | exp | log | sqrt | abs\n"
    "'^' is right-associative; unary minus binds looser than '^' (-x^2 = -(x^2)).";

enum class ExprOp {
  Number, Pi, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt, Abs,
  Sign,  // only produced by differentiate (d/du |u|)
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op = ExprOp::Number;
  double number = 0.0;
  ExprPtr lhs;  // operand of unary nodes and functions
  ExprPtr rhs;
};

/// Recursive-descent parse. Throws SyntaxError with byte offset and the set
/// of tokens that would have been accepted there.
ExprPtr parse_expression(std::string_view text);
/// Fully parenthesized rendering that re-parses to the same tree.
std::string to_string(const ExprPtr& e);
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);
/// Symbolic d/dx. With `strict`, abs has no derivative at 0.
ExprPtr differentiate(const ExprPtr& e);
/// Throws EvaluationError on math domain violations.
double evaluate_expr(const ExprPtr& e, double x, bool strict = false);

enum class TargetSource { Expression, Builtin, PiecewiseLinear, Series };

/// The function f being approximated.
class TargetFunction final : public RealFunction {
 public:
  static TargetFunction expression(std::string text, Interval domain, bool strict = false);
  /// "exp", "sinpi", "linear", "runge", or "tent_series(n)".
  static TargetFunction builtin(std::string_view name);
  /// Strictly increasing xs; domain is [xs.front(), xs.back()].
  static TargetFunction piecewise_linear(std::vector<double> xs, std::vector<double> ys,
                                         std::string descriptor = {});
  /// Finite sum of (index, coefficient) terms of `family`, summed in the given order.
  static TargetFunction series(BasisFamily family, std::vector<std::pair<int, double>> terms,
                               std::string descriptor = {});

  TargetSource source() const noexcept { return source_; }
  /// Stable identification recorded in certificates.
  const std::string& descriptor() const noexcept { return descriptor_; }
  bool derivative_available() const noexcept { return true; }

  Interval domain() const override { return domain_; }
  double value(double x) const override;
  double derivative(double x) const override;
  std::vector<double> kinks() const override;
  bool piecewise_linear() const override;
  int oscillation_hint() const override;

  const ExprPtr& ast() const noexcept { return ast_; }
  const std::vector<double>& sample_x() const noexcept { return xs_; }
  const std::vector<double>& sample_y() const noexcept { return ys_; }
  const std::vector<std::pair<int, double>>& series_terms() const noexcept { return terms_; }

  /// Same function with a different domain (restriction to a patch).
  TargetFunction restricted(Interval domain) const;

 private:
  TargetFunction() = default;
  void check_domain(double x) const;

  TargetSource source_ = TargetSource::Expression;
  std::string descriptor_;
  Interval domain_;
  bool strict_ = false;
  ExprPtr ast_;
  ExprPtr dast_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::shared_ptr<const BasisFamily> family_;
  std::vector<std::pair<int, double>> terms_;
};

double evaluate(const TargetFunction& f, double x);
double evaluate_deriv(const TargetFunction& f, double x);

/// "x y" per line, '#' comments, whitespace separated. FormatError with line
/// number on unsorted/duplicate x, non-numeric fields, or fewer than 2 rows.
TargetFunction load_samples(const std::filesystem::path& path);
TargetFunction parse_samples(std::string_view text, std::string descriptor);

/// CLI target spec: "builtin:<name>", "expr:<text>", or "data:<path>".
/// `domain` overrides the expression domain (default [0, 1]).
TargetFunction parse_target_spec(std::string_view spec, const Interval* domain = nullptr);

/// Partial sum f_n = sum_{k=0}^{n} 2^{-k} phi_{2^k}.
TargetFunction tent_partial_sum(int n);

}  // namespace certapprox
