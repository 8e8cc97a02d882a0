#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fracafd::cli {

struct Expression::Node {
  enum class Kind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Exp, Cos, Sin } kind;
  double value = 0.0;
  std::unique_ptr<Node> left, right;

  double eval(double x) const {
    switch (kind) {
      case Kind::Constant: return value;
      case Kind::Variable: return x;
      case Kind::Negate: return -left->eval(x);
      case Kind::Add: return left->eval(x) + right->eval(x);
      case Kind::Sub: return left->eval(x) - right->eval(x);
      case Kind::Mul: return left->eval(x) * right->eval(x);
      case Kind::Div: return left->eval(x) / right->eval(x);
      case Kind::Pow: return std::pow(left->eval(x), right->eval(x));
      case Kind::Exp: return std::exp(left->eval(x));
      case Kind::Cos: return std::cos(left->eval(x));
      case Kind::Sin: return std::sin(left->eval(x));
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using Kind = Node::Kind;

std::unique_ptr<Node> leaf(Kind kind, double value = 0.0) {
  auto n = std::make_unique<Node>();
  n->kind = kind;
  n->value = value;
  return n;
}

std::unique_ptr<Node> unary(Kind kind, std::unique_ptr<Node> arg) {
  auto n = leaf(kind);
  n->left = std::move(arg);
  return n;
}

std::unique_ptr<Node> binary(Kind kind, std::unique_ptr<Node> l, std::unique_ptr<Node> r) {
  auto n = leaf(kind);
  n->left = std::move(l);
  n->right = std::move(r);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  std::unique_ptr<Node> parse() {
    auto e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression: " + what + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::unique_ptr<Node> sum() {
    auto e = product();
    for (;;) {
      if (accept('+')) e = binary(Kind::Add, std::move(e), product());
      else if (accept('-')) e = binary(Kind::Sub, std::move(e), product());
      else return e;
    }
  }
  std::unique_ptr<Node> product() {
    auto e = signed_term();
    for (;;) {
      if (accept('*')) e = binary(Kind::Mul, std::move(e), signed_term());
      else if (accept('/')) e = binary(Kind::Div, std::move(e), signed_term());
      else return e;
    }
  }
  std::unique_ptr<Node> signed_term() {
    if (accept('-')) return unary(Kind::Negate, signed_term());
    if (accept('+')) return signed_term();
    return power();
  }
  std::unique_ptr<Node> power() {
    auto base = primary();
    if (accept('^')) return binary(Kind::Pow, std::move(base), signed_term());
    return base;
  }
  std::unique_ptr<Node> primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (accept('(')) {
      auto e = sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return leaf(Kind::Constant, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return leaf(Kind::Variable);
      if (name == "pi") return leaf(Kind::Constant, std::numbers::pi);
      Kind kind;
      if (name == "exp") kind = Kind::Exp;
      else if (name == "cos") kind = Kind::Cos;
      else if (name == "sin") kind = Kind::Sin;
      else {
        pos_ = start;
        fail("unknown name '" + name + "'");
      }
      expect('(');
      auto arg = sum();
      expect(')');
      return unary(kind, std::move(arg));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  std::shared_ptr<const Node> root = Parser(text).parse();
  return Expression(text, std::move(root));
}

double Expression::operator()(double x) const { return root_->eval(x); }

Expression load_expression_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ExpressionError("cannot open expression file '" + path + "'");
  std::ostringstream body;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] == '#') continue;
    body << line << ' ';
  }
  std::string text = body.str();
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  return Expression::parse(text);
}

}  // namespace fracafd::cli
