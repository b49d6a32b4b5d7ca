#pragma once

#include "mixop/types.hpp"

#include <memory>
#include <string>

namespace mixop {

/// Scalar field parsed from text: coordinates x1..xd, + - * / ^, unary minus,
/// abs sin cos tan exp log sqrt min max pow, constants pi and e.
/// Parse errors are ConfigError with the character position.
class Expression {
 public:
  struct Node;

  static Expression parse(const std::string& text, int dimension);

  double operator()(const Point& x) const;
  Field field() const;
  const std::string& text() const { return text_; }
  /// True when the expression does not depend on the coordinates.
  bool is_constant() const;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

double expression_eval(const std::string& text, const Point& x);

}  // namespace mixop
