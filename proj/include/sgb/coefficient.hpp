#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sgb {

/// Arithmetic expression in the variables t and x, compiled to a postfix program.
///
/// Grammar: numbers, t, x, pi, + - * / ^ (right associative), unary minus,
/// parentheses, and the functions sin cos tan exp log sqrt abs tanh floor
/// min(a,b) max(a,b).
class Expression {
 public:
  static Expression parse(std::string_view source);

  double eval(double t, double x) const;
  bool uses_t() const { return uses_t_; }
  bool uses_x() const { return uses_x_; }
  const std::string& source() const { return source_; }

  struct Op;

 private:
  std::string source_;
  std::shared_ptr<const std::vector<Op>> program_;
  int max_depth_ = 0;
  bool uses_t_ = false;
  bool uses_x_ = false;
};

/// Coefficient of the equation as a function of (t, x).
///
/// Text form (used by config files):
///   "1.5"                                constant
///   "table:x_min,x_max:v0 v1 ... vN"     equispaced samples, linear in x, constant in t
///   anything else                        Expression
class Coefficient {
 public:
  enum class Kind { constant, table, expression };

  Coefficient() = default;
  static Coefficient constant(double value);
  static Coefficient table(double x_min, double x_max, std::vector<double> values);
  static Coefficient expression(std::string_view source);
  static Coefficient parse(std::string_view text);

  double operator()(double t, double x) const;

  Kind kind() const { return kind_; }
  bool depends_on_t() const;
  bool depends_on_x() const;
  bool is_constant() const { return kind_ == Kind::constant; }
  double constant_value() const { return value_; }

  /// Text form accepted by parse().
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  double x_min_ = 0.0, x_max_ = 1.0;
  std::vector<double> samples_;
  std::shared_ptr<const Expression> expr_;
};

}  // namespace sgb
