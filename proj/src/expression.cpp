#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sgb/coefficient.hpp"
#include "sgb/error.hpp"

namespace sgb {

struct Expression::Op {
  enum Code { push, var_t, var_x, add, sub, mul, div, pow, neg, call1, call2 } code;
  double value = 0.0;
  int fn = 0;
};

namespace {

using Op = Expression::Op;

enum Fn1 { f_sin, f_cos, f_tan, f_exp, f_log, f_sqrt, f_abs, f_tanh, f_floor };
enum Fn2 { f_min, f_max };

struct Parser {
  std::string_view src;
  std::size_t pos = 0;
  std::vector<Op> out;
  bool uses_t = false, uses_x = false;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + std::string(src) + "': " + what + " at offset " + std::to_string(pos));
  }

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }
  bool accept(char c) {
    skip();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  // expr := term (('+'|'-') term)*
  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        out.push_back({Op::add});
      } else if (accept('-')) {
        term();
        out.push_back({Op::sub});
      } else {
        return;
      }
    }
  }
  // term := unary (('*'|'/') unary)*
  void term() {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        out.push_back({Op::mul});
      } else if (accept('/')) {
        unary();
        out.push_back({Op::div});
      } else {
        return;
      }
    }
  }
  // unary := '-' unary | power
  void unary() {
    if (accept('-')) {
      unary();
      out.push_back({Op::neg});
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }
  // power := primary ('^' unary)?
  void power() {
    primary();
    if (accept('^')) {
      unary();
      out.push_back({Op::pow});
    }
  }
  void primary() {
    skip();
    if (pos >= src.size()) fail("unexpected end");
    const char c = src[pos];
    if (c == '(') {
      ++pos;
      expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(src.data() + pos, src.data() + src.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos = static_cast<std::size_t>(ptr - src.data());
      out.push_back({Op::push, v});
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos;
      while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) ++pos;
      const std::string_view name = src.substr(start, pos - start);
      if (name == "t") {
        uses_t = true;
        out.push_back({Op::var_t});
        return;
      }
      if (name == "x") {
        uses_x = true;
        out.push_back({Op::var_x});
        return;
      }
      if (name == "pi") {
        out.push_back({Op::push, std::numbers::pi});
        return;
      }
      static constexpr std::pair<std::string_view, int> unary_fns[] = {
          {"sin", f_sin},   {"cos", f_cos}, {"tan", f_tan},   {"exp", f_exp},    {"log", f_log},
          {"sqrt", f_sqrt}, {"abs", f_abs}, {"tanh", f_tanh}, {"floor", f_floor}};
      for (auto [fname, id] : unary_fns) {
        if (name == fname) {
          expect('(');
          expr();
          expect(')');
          out.push_back({Op::call1, 0.0, id});
          return;
        }
      }
      if (name == "min" || name == "max") {
        expect('(');
        expr();
        expect(',');
        expr();
        expect(')');
        out.push_back({Op::call2, 0.0, name == "min" ? f_min : f_max});
        return;
      }
      pos = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expression Expression::parse(std::string_view source) {
  Parser p{source, 0, {}, false, false};
  p.expr();
  p.skip();
  if (p.pos != source.size()) p.fail("trailing characters");
  Expression e;
  e.source_ = std::string(source);
  e.uses_t_ = p.uses_t;
  e.uses_x_ = p.uses_x;
  int depth = 0;
  for (const auto& op : p.out) {
    switch (op.code) {
      case Op::push:
      case Op::var_t:
      case Op::var_x: ++depth; break;
      case Op::neg:
      case Op::call1: break;
      default: --depth; break;
    }
    e.max_depth_ = std::max(e.max_depth_, depth);
  }
  e.program_ = std::make_shared<const std::vector<Op>>(std::move(p.out));
  return e;
}

double Expression::eval(double t, double x) const {
  double stack_buf[64] = {};
  std::vector<double> heap;
  double* st = stack_buf;
  if (max_depth_ > 64) {
    heap.resize(static_cast<std::size_t>(max_depth_));
    st = heap.data();
  }
  int top = -1;
  for (const auto& op : *program_) {
    switch (op.code) {
      case Op::push: st[++top] = op.value; break;
      case Op::var_t: st[++top] = t; break;
      case Op::var_x: st[++top] = x; break;
      case Op::add: st[top - 1] += st[top]; --top; break;
      case Op::sub: st[top - 1] -= st[top]; --top; break;
      case Op::mul: st[top - 1] *= st[top]; --top; break;
      case Op::div: st[top - 1] /= st[top]; --top; break;
      case Op::pow: st[top - 1] = std::pow(st[top - 1], st[top]); --top; break;
      case Op::neg: st[top] = -st[top]; break;
      case Op::call1: {
        double& v = st[top];
        switch (op.fn) {
          case f_sin: v = std::sin(v); break;
          case f_cos: v = std::cos(v); break;
          case f_tan: v = std::tan(v); break;
          case f_exp: v = std::exp(v); break;
          case f_log: v = std::log(v); break;
          case f_sqrt: v = std::sqrt(v); break;
          case f_abs: v = std::abs(v); break;
          case f_tanh: v = std::tanh(v); break;
          case f_floor: v = std::floor(v); break;
        }
        break;
      }
      case Op::call2:
        st[top - 1] = op.fn == f_min ? std::min(st[top - 1], st[top]) : std::max(st[top - 1], st[top]);
        --top;
        break;
    }
  }
  return st[0];
}

// ---------------------------------------------------------------------------

Coefficient Coefficient::constant(double value) {
  Coefficient c;
  c.kind_ = Kind::constant;
  c.value_ = value;
  return c;
}

Coefficient Coefficient::table(double x_min, double x_max, std::vector<double> values) {
  if (values.size() < 2) throw ConfigError("coefficient table needs at least two samples");
  if (!(x_max > x_min)) throw ConfigError("coefficient table: x_max must exceed x_min");
  Coefficient c;
  c.kind_ = Kind::table;
  c.x_min_ = x_min;
  c.x_max_ = x_max;
  c.samples_ = std::move(values);
  return c;
}

Coefficient Coefficient::expression(std::string_view source) {
  Coefficient c;
  c.kind_ = Kind::expression;
  c.expr_ = std::make_shared<const Expression>(Expression::parse(source));
  return c;
}

Coefficient Coefficient::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) throw ConfigError("empty coefficient");
  {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc() && ptr == text.data() + text.size()) return constant(v);
  }
  if (text.starts_with("table:")) {
    const std::string body(text.substr(6));
    const auto colon = body.find(':');
    const auto comma = body.find(',');
    if (colon == std::string::npos || comma == std::string::npos || comma > colon)
      throw ConfigError("coefficient table must read table:x_min,x_max:v0 v1 ...");
    const double x0 = std::stod(body.substr(0, comma));
    const double x1 = std::stod(body.substr(comma + 1, colon - comma - 1));
    std::istringstream vs(body.substr(colon + 1));
    std::vector<double> values;
    for (double v; vs >> v;) values.push_back(v);
    return table(x0, x1, std::move(values));
  }
  return expression(text);
}

double Coefficient::operator()(double t, double x) const {
  switch (kind_) {
    case Kind::constant: return value_;
    case Kind::expression: return expr_->eval(t, x);
    case Kind::table: {
      const double f = (x - x_min_) / (x_max_ - x_min_) * static_cast<double>(samples_.size() - 1);
      if (f <= 0.0) return samples_.front();
      if (f >= static_cast<double>(samples_.size() - 1)) return samples_.back();
      const auto i = static_cast<std::size_t>(f);
      const double w = f - static_cast<double>(i);
      return (1.0 - w) * samples_[i] + w * samples_[i + 1];
    }
  }
  return 0.0;
}

bool Coefficient::depends_on_t() const { return kind_ == Kind::expression && expr_->uses_t(); }

bool Coefficient::depends_on_x() const {
  return kind_ == Kind::table || (kind_ == Kind::expression && expr_->uses_x());
}

std::string Coefficient::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::constant: os << value_; break;
    case Kind::expression: os << expr_->source(); break;
    case Kind::table:
      os << "table:" << x_min_ << ',' << x_max_ << ':';
      for (std::size_t i = 0; i < samples_.size(); ++i) os << (i ? " " : "") << samples_[i];
      break;
  }
  return os.str();
}

}  // namespace sgb
