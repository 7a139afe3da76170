#include "certapprox/target.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "certapprox/canonical.hpp"
#include "certapprox/errors.hpp"

namespace certapprox {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected)
    : Error("syntax error at offset " + std::to_string(offset) + ": expected one of " +
            join(expected)),
      offset_(offset),
      expected_(std::move(expected)) {}

// ---------------------------------------------------------------------------
// Expression trees

namespace {

ExprPtr make(ExprOp op, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

ExprPtr number(double v) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Number;
  e->number = v;
  return e;
}

bool is_number(const ExprPtr& e, double v) { return e->op == ExprOp::Number && e->number == v; }

struct FunctionName {
  std::string_view name;
  ExprOp op;
};

constexpr FunctionName kFunctions[] = {
    {"sin", ExprOp::Sin}, {"cos", ExprOp::Cos},   {"exp", ExprOp::Exp},
    {"log", ExprOp::Log}, {"sqrt", ExprOp::Sqrt}, {"abs", ExprOp::Abs},
};

const std::vector<std::string> kOperandStart = {"number", "'x'", "'pi'", "function", "'('", "'-'"};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, kOperandStart);
    ExprPtr e = expr();
    skip_ws();
    if (pos_ < text_.size()) {
      throw SyntaxError(pos_, {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(ExprOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(ExprOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr term() {
    ExprPtr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make(ExprOp::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make(ExprOp::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr factor() {
    if (accept('-')) return make(ExprOp::Neg, factor());
    ExprPtr b = base();
    if (accept('^')) return make(ExprOp::Pow, b, factor());
    return b;
  }

  ExprPtr base() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, kOperandStart);
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number_literal();
    if (c == '(') {
      ++pos_;
      ExprPtr inner = expr();
      if (!accept(')')) throw SyntaxError(pos_, {"')'"});
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view word = text_.substr(start, pos_ - start);
      if (word == "x") return make(ExprOp::Var);
      if (word == "pi") return make(ExprOp::Pi);
      for (const auto& fn : kFunctions) {
        if (word == fn.name) {
          if (!accept('(')) throw SyntaxError(pos_, {"'('"});
          ExprPtr arg = expr();
          if (!accept(')')) throw SyntaxError(pos_, {"')'"});
          return make(fn.op, arg);
        }
      }
      throw SyntaxError(start, kOperandStart);
    }
    throw SyntaxError(pos_, kOperandStart);
  }

  ExprPtr number_literal() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw SyntaxError(start, {"digit"});
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;  // "2e" is 2 followed by an identifier
    }
    double v = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw SyntaxError(start, {"number"});
    return number(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string_view op_symbol(ExprOp op) {
  switch (op) {
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    case ExprOp::Div: return "/";
    case ExprOp::Pow: return "^";
    default: return "";
  }
}

std::string_view function_name(ExprOp op) {
  if (op == ExprOp::Sign) return "sign";
  for (const auto& fn : kFunctions) {
    if (fn.op == op) return fn.name;
  }
  return "";
}

bool depends_on_x(const ExprPtr& e) {
  if (!e) return false;
  if (e->op == ExprOp::Var) return true;
  return depends_on_x(e->lhs) || depends_on_x(e->rhs);
}

// Constructors with light constant folding for derivative trees.
ExprPtr add(ExprPtr a, ExprPtr b) {
  if (is_number(a, 0.0)) return b;
  if (is_number(b, 0.0)) return a;
  if (a->op == ExprOp::Number && b->op == ExprOp::Number) return number(a->number + b->number);
  return make(ExprOp::Add, a, b);
}
ExprPtr sub(ExprPtr a, ExprPtr b) {
  if (is_number(b, 0.0)) return a;
  if (a->op == ExprOp::Number && b->op == ExprOp::Number) return number(a->number - b->number);
  if (is_number(a, 0.0)) return make(ExprOp::Neg, b);
  return make(ExprOp::Sub, a, b);
}
ExprPtr mul(ExprPtr a, ExprPtr b) {
  if (is_number(a, 0.0) || is_number(b, 0.0)) return number(0.0);
  if (is_number(a, 1.0)) return b;
  if (is_number(b, 1.0)) return a;
  if (a->op == ExprOp::Number && b->op == ExprOp::Number) return number(a->number * b->number);
  return make(ExprOp::Mul, a, b);
}
ExprPtr div(ExprPtr a, ExprPtr b) {
  if (is_number(a, 0.0)) return number(0.0);
  if (is_number(b, 1.0)) return a;
  return make(ExprOp::Div, a, b);
}
ExprPtr neg(ExprPtr a) {
  if (a->op == ExprOp::Number) return number(-a->number);
  return make(ExprOp::Neg, a);
}

[[noreturn]] void domain_violation(const char* what, double x) {
  std::ostringstream msg;
  msg.precision(17);
  msg << what << " at x = " << x;
  throw EvaluationError(msg.str(), x);
}

double eval_node(const Expr& e, double x, bool strict) {
  switch (e.op) {
    case ExprOp::Number: return e.number;
    case ExprOp::Pi: return std::numbers::pi;
    case ExprOp::Var: return x;
    case ExprOp::Neg: return -eval_node(*e.lhs, x, strict);
    case ExprOp::Add: return eval_node(*e.lhs, x, strict) + eval_node(*e.rhs, x, strict);
    case ExprOp::Sub: return eval_node(*e.lhs, x, strict) - eval_node(*e.rhs, x, strict);
    case ExprOp::Mul: return eval_node(*e.lhs, x, strict) * eval_node(*e.rhs, x, strict);
    case ExprOp::Div: {
      const double d = eval_node(*e.rhs, x, strict);
      if (d == 0.0) domain_violation("division by zero", x);
      return eval_node(*e.lhs, x, strict) / d;
    }
    case ExprOp::Pow: {
      const double b = eval_node(*e.lhs, x, strict);
      const double p = eval_node(*e.rhs, x, strict);
      if (b < 0.0 && p != std::floor(p)) domain_violation("negative base with fractional exponent", x);
      if (b == 0.0 && p < 0.0) domain_violation("zero raised to a negative power", x);
      return std::pow(b, p);
    }
    case ExprOp::Sin: return std::sin(eval_node(*e.lhs, x, strict));
    case ExprOp::Cos: return std::cos(eval_node(*e.lhs, x, strict));
    case ExprOp::Exp: return std::exp(eval_node(*e.lhs, x, strict));
    case ExprOp::Log: {
      const double a = eval_node(*e.lhs, x, strict);
      if (!(a > 0.0)) domain_violation("log of a non-positive value", x);
      return std::log(a);
    }
    case ExprOp::Sqrt: {
      const double a = eval_node(*e.lhs, x, strict);
      if (a < 0.0) domain_violation("sqrt of a negative value", x);
      return std::sqrt(a);
    }
    case ExprOp::Abs: return std::fabs(eval_node(*e.lhs, x, strict));
    case ExprOp::Sign: {
      const double a = eval_node(*e.lhs, x, strict);
      if (a == 0.0 && strict) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "abs is not differentiable at x = " << x << " (strict mode)";
        throw CapabilityError(msg.str());
      }
      return a >= 0.0 ? 1.0 : -1.0;
    }
  }
  return 0.0;
}

}  // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const ExprPtr& e) {
  switch (e->op) {
    case ExprOp::Number: {
      const std::string s = format_double(e->number);
      return e->number < 0.0 ? "(" + s + ")" : s;
    }
    case ExprOp::Pi: return "pi";
    case ExprOp::Var: return "x";
    case ExprOp::Neg: return "(-" + to_string(e->lhs) + ")";
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div:
    case ExprOp::Pow:
      return "(" + to_string(e->lhs) + std::string(op_symbol(e->op)) + to_string(e->rhs) + ")";
    default:
      return std::string(function_name(e->op)) + "(" + to_string(e->lhs) + ")";
  }
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->op != b->op) return false;
  if (a->op == ExprOp::Number && a->number != b->number) return false;
  return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
}

ExprPtr differentiate(const ExprPtr& e) {
  switch (e->op) {
    case ExprOp::Number:
    case ExprOp::Pi: return number(0.0);
    case ExprOp::Var: return number(1.0);
    case ExprOp::Neg: return neg(differentiate(e->lhs));
    case ExprOp::Add: return add(differentiate(e->lhs), differentiate(e->rhs));
    case ExprOp::Sub: return sub(differentiate(e->lhs), differentiate(e->rhs));
    case ExprOp::Mul:
      return add(mul(differentiate(e->lhs), e->rhs), mul(e->lhs, differentiate(e->rhs)));
    case ExprOp::Div:
      return div(sub(mul(differentiate(e->lhs), e->rhs), mul(e->lhs, differentiate(e->rhs))),
                 mul(e->rhs, e->rhs));
    case ExprOp::Pow: {
      const ExprPtr& u = e->lhs;
      const ExprPtr& p = e->rhs;
      if (!depends_on_x(p)) {
        return mul(mul(p, make(ExprOp::Pow, u, sub(p, number(1.0)))), differentiate(u));
      }
      // d(u^p) = u^p (p' log u + p u' / u)
      return mul(e, add(mul(differentiate(p), make(ExprOp::Log, u)),
                        div(mul(p, differentiate(u)), u)));
    }
    case ExprOp::Sin: return mul(make(ExprOp::Cos, e->lhs), differentiate(e->lhs));
    case ExprOp::Cos: return mul(neg(make(ExprOp::Sin, e->lhs)), differentiate(e->lhs));
    case ExprOp::Exp: return mul(e, differentiate(e->lhs));
    case ExprOp::Log: return div(differentiate(e->lhs), e->lhs);
    case ExprOp::Sqrt: return div(differentiate(e->lhs), mul(number(2.0), e));
    case ExprOp::Abs: return mul(make(ExprOp::Sign, e->lhs), differentiate(e->lhs));
    case ExprOp::Sign: return number(0.0);
  }
  return number(0.0);
}

double evaluate_expr(const ExprPtr& e, double x, bool strict) {
  const double v = eval_node(*e, x, strict);
  if (!std::isfinite(v)) domain_violation("non-finite expression value", x);
  return v;
}

// ---------------------------------------------------------------------------
// TargetFunction

TargetFunction TargetFunction::expression(std::string text, Interval domain, bool strict) {
  if (!(domain.lo < domain.hi)) throw ConfigurationError("target domain needs lo < hi");
  TargetFunction f;
  f.source_ = TargetSource::Expression;
  f.ast_ = parse_expression(text);
  f.dast_ = differentiate(f.ast_);
  f.domain_ = domain;
  f.strict_ = strict;
  f.descriptor_ = "expr:" + text;
  return f;
}

TargetFunction TargetFunction::builtin(std::string_view name) {
  struct Seed {
    std::string_view name;
    std::string_view text;
    Interval domain;
  };
  static constexpr Seed kSeeds[] = {
      {"exp", "exp(x)", {-1.0, 1.0}},
      {"sinpi", "sin(pi*x)", {0.0, 1.0}},
      {"linear", "x", {0.0, 1.0}},
      {"runge", "1/(1+25*x^2)", {-1.0, 1.0}},
  };
  for (const auto& seed : kSeeds) {
    if (seed.name == name) {
      TargetFunction f = expression(std::string(seed.text), seed.domain);
      f.source_ = TargetSource::Builtin;
      f.descriptor_ = "builtin:" + std::string(name);
      return f;
    }
  }
  constexpr std::string_view kTent = "tent_series(";
  if (name.starts_with(kTent) && name.ends_with(")")) {
    const auto digits = name.substr(kTent.size(), name.size() - kTent.size() - 1);
    int n = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && n >= 0) {
      return tent_partial_sum(n);
    }
  }
  throw ConfigurationError("unknown builtin target '" + std::string(name) + "'");
}

TargetFunction TargetFunction::piecewise_linear(std::vector<double> xs, std::vector<double> ys,
                                                std::string descriptor) {
  if (xs.size() != ys.size()) throw ConfigurationError("sample lists differ in length");
  if (xs.size() < 2) throw ConfigurationError("piecewise-linear target needs >= 2 points");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw ConfigurationError("breakpoints must be strictly increasing");
  }
  TargetFunction f;
  f.source_ = TargetSource::PiecewiseLinear;
  f.domain_ = {xs.front(), xs.back()};
  f.xs_ = std::move(xs);
  f.ys_ = std::move(ys);
  if (descriptor.empty()) {
    Json j = {{"x", f.xs_}, {"y", f.ys_}};
    descriptor = "data:sha256:" + sha256_hex(canonical_dump(j));
  }
  f.descriptor_ = std::move(descriptor);
  return f;
}

TargetFunction TargetFunction::series(BasisFamily family, std::vector<std::pair<int, double>> terms,
                                      std::string descriptor) {
  for (const auto& [j, c] : terms) {
    if (!family.valid_index(j)) throw ConfigurationError("series term index outside family");
  }
  TargetFunction f;
  f.source_ = TargetSource::Series;
  f.domain_ = family.domain();
  f.family_ = std::make_shared<const BasisFamily>(std::move(family));
  f.terms_ = std::move(terms);
  if (descriptor.empty()) {
    Json j = Json::array();
    for (const auto& [idx, c] : f.terms_) j.push_back(Json::array({idx, c}));
    descriptor = "series:" + std::string(f.family_->name()) + ":sha256:" +
                 sha256_hex(canonical_dump(j));
  }
  f.descriptor_ = std::move(descriptor);
  return f;
}

TargetFunction tent_partial_sum(int n) {
  if (n < 0 || n > 50) throw ConfigurationError("tent_series depth outside [0, 50]");
  std::vector<std::pair<int, double>> terms;
  for (int k = 0; k <= n; ++k) terms.emplace_back(k, std::ldexp(1.0, -k));
  auto f = TargetFunction::series(BasisFamily::tent(), std::move(terms),
                                  "builtin:tent_series(" + std::to_string(n) + ")");
  return f;
}

TargetFunction TargetFunction::restricted(Interval domain) const {
  if (domain.lo < domain_.lo || domain.hi > domain_.hi || !(domain.lo < domain.hi)) {
    throw ConfigurationError("restriction " + to_string(domain) + " not inside target domain " +
                             to_string(domain_));
  }
  TargetFunction f = *this;
  f.domain_ = domain;
  return f;
}

void TargetFunction::check_domain(double x) const {
  if (!domain_.contains(x)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "x = " << x << " outside target domain " << to_string(domain_);
    throw DomainError(msg.str());
  }
}

namespace {

std::size_t segment_of(const std::vector<double>& xs, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  return std::min(i, xs.size() - 2);
}

}  // namespace

double TargetFunction::value(double x) const {
  check_domain(x);
  switch (source_) {
    case TargetSource::Expression:
    case TargetSource::Builtin:
      return evaluate_expr(ast_, x, strict_);
    case TargetSource::PiecewiseLinear: {
      const std::size_t i = segment_of(xs_, x);
      if (x == xs_[i]) return ys_[i];
      if (x == xs_[i + 1]) return ys_[i + 1];
      const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
      return ys_[i] + t * (ys_[i + 1] - ys_[i]);
    }
    case TargetSource::Series: {
      double s = 0.0;
      for (const auto& [j, c] : terms_) s += c * family_->eval(j, x);
      return s;
    }
  }
  return 0.0;
}

double TargetFunction::derivative(double x) const {
  check_domain(x);
  switch (source_) {
    case TargetSource::Expression:
    case TargetSource::Builtin:
      return evaluate_expr(dast_, x, strict_);
    case TargetSource::PiecewiseLinear: {
      const std::size_t i = segment_of(xs_, x);
      return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
    }
    case TargetSource::Series: {
      double s = 0.0;
      for (const auto& [j, c] : terms_) s += c * family_->eval_deriv(j, x);
      return s;
    }
  }
  return 0.0;
}

std::vector<double> TargetFunction::kinks() const {
  std::vector<double> out;
  if (source_ == TargetSource::PiecewiseLinear) {
    out.assign(xs_.begin() + 1, xs_.end() - 1);
  } else if (source_ == TargetSource::Series) {
    for (const auto& [j, c] : terms_) {
      auto k = family_->kinks(j);
      out.insert(out.end(), k.begin(), k.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  std::erase_if(out, [this](double k) { return !(k > domain_.lo && k < domain_.hi); });
  return out;
}

bool TargetFunction::piecewise_linear() const {
  return source_ == TargetSource::PiecewiseLinear ||
         (source_ == TargetSource::Series && family_->kind() == BasisKind::TentHierarchy);
}

int TargetFunction::oscillation_hint() const {
  if (source_ != TargetSource::Series) return 0;
  int h = 0;
  for (const auto& [j, c] : terms_) h = std::max(h, family_->oscillation_hint(j));
  return h;
}

double evaluate(const TargetFunction& f, double x) { return f.value(x); }
double evaluate_deriv(const TargetFunction& f, double x) { return f.derivative(x); }

// ---------------------------------------------------------------------------
// Samples

TargetFunction parse_samples(std::string_view text, std::string descriptor) {
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (!fields.empty()) {
      if (fields.size() != 2) throw FormatError("expected two fields 'x y'", line_no);
      double v[2];
      for (int k = 0; k < 2; ++k) {
        auto f = fields[static_cast<std::size_t>(k)];
        if (!f.empty() && f.front() == '+') f.remove_prefix(1);
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
        if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v[k])) {
          throw FormatError("non-numeric field '" + std::string(fields[static_cast<std::size_t>(k)]) + "'",
                            line_no);
        }
      }
      if (!xs.empty() && !(v[0] > xs.back())) {
        throw FormatError(v[0] == xs.back() ? "duplicate x" : "x not increasing", line_no);
      }
      xs.push_back(v[0]);
      ys.push_back(v[1]);
    }
    if (end == text.size()) break;
  }
  if (xs.size() < 2) throw FormatError("need at least 2 sample rows", line_no);
  return TargetFunction::piecewise_linear(std::move(xs), std::move(ys), std::move(descriptor));
}

TargetFunction load_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open sample file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return parse_samples(text, "data:sha256:" + sha256_hex(text));
}

TargetFunction parse_target_spec(std::string_view spec, const Interval* domain) {
  if (spec.starts_with("builtin:")) {
    auto f = TargetFunction::builtin(spec.substr(8));
    return domain ? f.restricted(*domain) : f;
  }
  if (spec.starts_with("expr:")) {
    return TargetFunction::expression(std::string(spec.substr(5)), domain ? *domain : Interval{0.0, 1.0});
  }
  if (spec.starts_with("data:")) {
    auto f = load_samples(std::string(spec.substr(5)));
    return domain ? f.restricted(*domain) : f;
  }
  throw ConfigurationError("target spec must start with builtin:, expr:, or data:");
}

}  // namespace certapprox
