#include "mixop/expression.hpp"

#include "mixop/errors.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace mixop {

struct Expression::Node {
  enum class Kind { Number, Coordinate, Negate, Binary, Call } kind = Kind::Number;
  double value = 0.0;
  int coordinate = 0;
  char op = 0;
  std::string function;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

struct FunctionInfo {
  const char* name;
  int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"abs", 1}, {"sin", 1}, {"cos", 1}, {"tan", 1},  {"exp", 1},  {"log", 1},
    {"sqrt", 1}, {"min", 2}, {"max", 2}, {"pow", 2}, {"tanh", 1},
};

class Parser {
 public:
  Parser(const std::string& text, int dimension) : text_(text), dimension_(dimension) {}

  NodePtr parse() {
    NodePtr root = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression \"" << text_ << "\": " << what << " at position " << pos_;
    throw ConfigError(os.str());
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary('+', lhs, term());
      } else if (accept('-')) {
        lhs = binary('-', lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary('*', lhs, unary());
      } else if (accept('/')) {
        lhs = binary('/', lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Negate;
      n->args = {unary()};
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  // Right associative; binds tighter than unary minus on its left (-x^2 = -(x^2)).
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary('^', base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name = text_.substr(start, pos_ - start);
    auto n = std::make_shared<Node>();
    if (name == "pi") {
      n->value = std::numbers::pi;
      return n;
    }
    if (name == "e") {
      n->value = std::numbers::e;
      return n;
    }
    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int k = std::stoi(name.substr(1));
      if (k < 1 || k > dimension_) {
        pos_ = start;
        fail("coordinate '" + name + "' outside 1.." + std::to_string(dimension_));
      }
      n->kind = Node::Kind::Coordinate;
      n->coordinate = k - 1;
      return n;
    }
    for (const auto& f : kFunctions) {
      if (name != f.name) continue;
      if (!accept('(')) fail("expected '(' after " + name);
      n->kind = Node::Kind::Call;
      n->function = name;
      if (!accept(')')) {
        do {
          n->args.push_back(expression());
        } while (accept(','));
        if (!accept(')')) fail("expected ')' closing " + name);
      }
      if (static_cast<int>(n->args.size()) != f.arity) {
        fail(name + " takes " + std::to_string(f.arity) + " argument(s), got " + std::to_string(n->args.size()));
      }
      return n;
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  const std::string& text_;
  int dimension_;
  std::size_t pos_ = 0;
};

double evaluate(const Node& n, const Point& x) {
  switch (n.kind) {
    case Node::Kind::Number:
      return n.value;
    case Node::Kind::Coordinate:
      return x(n.coordinate);
    case Node::Kind::Negate:
      return -evaluate(*n.args[0], x);
    case Node::Kind::Binary: {
      const double a = evaluate(*n.args[0], x);
      const double b = evaluate(*n.args[1], x);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
    case Node::Kind::Call: {
      const double a = evaluate(*n.args[0], x);
      const std::string& f = n.function;
      if (f == "abs") return std::abs(a);
      if (f == "sin") return std::sin(a);
      if (f == "cos") return std::cos(a);
      if (f == "tan") return std::tan(a);
      if (f == "tanh") return std::tanh(a);
      if (f == "exp") return std::exp(a);
      if (f == "log") return std::log(a);
      if (f == "sqrt") return std::sqrt(a);
      const double b = evaluate(*n.args[1], x);
      if (f == "min") return std::min(a, b);
      if (f == "max") return std::max(a, b);
      return std::pow(a, b);
    }
  }
  return 0.0;
}

bool depends_on_x(const Node& n) {
  if (n.kind == Node::Kind::Coordinate) return true;
  for (const auto& a : n.args) {
    if (depends_on_x(*a)) return true;
  }
  return false;
}

}  // namespace

Expression Expression::parse(const std::string& text, int dimension) {
  if (dimension < 1 || dimension > kMaxDimension) throw ArgumentError("expression dimension must lie in 1..3");
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text, dimension).parse();
  return e;
}

double Expression::operator()(const Point& x) const { return evaluate(*root_, x); }

Field Expression::field() const {
  auto root = root_;
  return [root](const Point& x) { return evaluate(*root, x); };
}

bool Expression::is_constant() const { return !depends_on_x(*root_); }

double expression_eval(const std::string& text, const Point& x) {
  return Expression::parse(text, static_cast<int>(x.size()))(x);
}

}  // namespace mixop
