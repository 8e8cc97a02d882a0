#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace fracafd::cli {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A real function of x parsed from text. Grammar: numbers, x, pi,
/// + - * / ^ (right associative), parentheses, exp(), cos(), sin().
/// Unary minus binds looser than ^, so -x^2 is -(x^2).
class Expression {
 public:
  static Expression parse(const std::string& text);

  double operator()(double x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  Expression(std::string text, std::shared_ptr<const Node> root) : text_(std::move(text)), root_(std::move(root)) {}
  std::string text_;
  std::shared_ptr<const Node> root_;
};

/// Reads an expression file; lines starting with '#' are comments.
Expression load_expression_file(const std::string& path);

}  // namespace fracafd::cli
