#include "liesynth/sexpr.hpp"

#include "liesynth/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <limits>

namespace liesynth {

namespace {

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Kind::Const:
      out += e.value().to_string();
      return;
    case Kind::Var:
      out += "(var " + std::to_string(e.component() + 1) + ")";
      return;
    case Kind::Power:
      out += "(^ ";
      print(e.operand(0), out);
      out += " " + std::to_string(e.exponent()) + ")";
      return;
    case Kind::Sum:
    case Kind::Product:
      out += e.kind() == Kind::Sum ? "(+" : "(*";
      for (const auto& op : e.operands()) {
        out += ' ';
        print(op, out);
      }
      out += ')';
      return;
    case Kind::Sin: out += "(sin "; break;
    case Kind::Cos: out += "(cos "; break;
    case Kind::Sec: out += "(sec "; break;
    case Kind::Exp: out += "(exp "; break;
    case Kind::Log: out += "(log "; break;
  }
  print(e.operand(0), out);
  out += ')';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError, "s-expression: " + what + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view token() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) fail("expected a token");
    return text_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  long long parse_integer(std::string_view t) {
    long long v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) fail("bad integer '" + std::string(t) + "'");
    return v;
  }

  Number parse_number(std::string_view t) {
    if (t == "inf") return Number(std::numeric_limits<double>::infinity());
    if (t == "-inf") return Number(-std::numeric_limits<double>::infinity());
    if (t == "nan") return Number(std::numeric_limits<double>::quiet_NaN());
    if (auto slash = t.find('/'); slash != std::string_view::npos) {
      auto num = t.substr(0, slash);
      auto den = t.substr(slash + 1);
      for (auto part : {num, den}) {
        for (std::size_t i = 0; i < part.size(); ++i) {
          bool sign = i == 0 && part[i] == '-' && part.size() > 1;
          if (!sign && !std::isdigit(static_cast<unsigned char>(part[i]))) fail("bad rational");
        }
        if (part.empty()) fail("bad rational");
      }
      Rational d{boost::multiprecision::cpp_int(std::string(den))};
      if (d == 0) fail("zero denominator");
      return Number(Rational(boost::multiprecision::cpp_int(std::string(num))) / d);
    }
    if (t.find_first_of(".eE") != std::string_view::npos) {
      std::string s(t);
      char* end = nullptr;
      double d = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size()) fail("bad float '" + s + "'");
      return Number(d);
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      bool sign = i == 0 && (t[i] == '-' || t[i] == '+') && t.size() > 1;
      if (!sign && !std::isdigit(static_cast<unsigned char>(t[i]))) fail("bad number '" + std::string(t) + "'");
    }
    std::string digits(t[0] == '+' ? t.substr(1) : t);
    return Number(Rational(boost::multiprecision::cpp_int(digits)));
  }

  Expr parse_expr() {
    if (!peek('(')) return Expr::constant(parse_number(token()));
    expect('(');
    std::string_view head = token();
    Expr out;
    if (head == "var") {
      long long k = parse_integer(token());
      if (k < 1) fail("component indices start at 1");
      out = Expr::var(static_cast<int>(k - 1));
    } else if (head == "^") {
      Expr base = parse_expr();
      out = Expr::power(base, static_cast<int>(parse_integer(token())));
    } else if (head == "+" || head == "*" || head == "-" || head == "/") {
      std::vector<Expr> ops;
      while (!peek(')')) {
        if (pos_ >= text_.size()) fail("unterminated list");
        ops.push_back(parse_expr());
      }
      if (head == "+") {
        out = Expr::sum(std::move(ops));
      } else if (head == "*") {
        out = Expr::product(std::move(ops));
      } else if (head == "-") {
        if (ops.empty()) fail("'-' needs an operand");
        if (ops.size() == 1) {
          out = -ops[0];
        } else {
          std::vector<Expr> terms{ops[0]};
          for (std::size_t i = 1; i < ops.size(); ++i) terms.push_back(-ops[i]);
          out = Expr::sum(std::move(terms));
        }
      } else {
        if (ops.size() != 2) fail("'/' takes two operands");
        out = ops[0] / ops[1];
      }
    } else {
      Kind kind;
      if (head == "sin") kind = Kind::Sin;
      else if (head == "cos") kind = Kind::Cos;
      else if (head == "sec") kind = Kind::Sec;
      else if (head == "exp") kind = Kind::Exp;
      else if (head == "log") kind = Kind::Log;
      else fail("unknown operator '" + std::string(head) + "'");
      out = Expr::function(kind, parse_expr());
    }
    expect(')');
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_sexpr(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

Expr parse_sexpr(std::string_view text) { return Parser(text).parse_all(); }

}  // namespace liesynth
