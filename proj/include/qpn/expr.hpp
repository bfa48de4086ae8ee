#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qpn {

enum class ExprKind {
  Constant,
  Pi,
  MarkRef,
  Negate,
  Add,
  Subtract,
  Multiply,
  Divide,
  Power,
  Cos,
  Sin,
  Sqrt,
};

/// Immutable arc-weight expression tree. Copies share structure.
///
/// Constants are always stored non-negative: `constant(-2)` builds
/// `Negate(Constant 2)`, which is also what the parser produces for `-2`.
/// That keeps `parse(format(e)) == e` true for every tree.
class WeightExpr {
public:
  /// Constant 0.
  WeightExpr();

  static WeightExpr constant(double value);
  static WeightExpr pi();
  static WeightExpr mark(std::string place);
  static WeightExpr negate(WeightExpr operand);
  static WeightExpr binary(ExprKind kind, WeightExpr lhs, WeightExpr rhs);
  static WeightExpr call(ExprKind kind, WeightExpr operand);

  ExprKind kind() const noexcept { return node_->kind; }
  double value() const noexcept { return node_->value; }
  const std::string& place() const noexcept { return node_->place; }
  /// Left operand of a binary node, or the operand of a unary node.
  WeightExpr lhs() const;
  WeightExpr rhs() const;

  bool is_binary() const noexcept;
  bool is_unary() const noexcept;
  /// True when no MarkRef occurs in the tree.
  bool is_constant() const noexcept;

  friend bool operator==(const WeightExpr& a, const WeightExpr& b);

private:
  struct Node {
    ExprKind kind = ExprKind::Constant;
    double value = 0.0;
    std::string place;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  explicit WeightExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Parses the weight grammar:
///
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := "-" factor | power
///   power  := atom ("^" factor)?
///   atom   := NUMBER | "pi" | "m" "(" IDENT ")" | FUNC "(" expr ")" | "(" expr ")"
///   FUNC   := "cos" | "sin" | "sqrt"
///
/// Throws Error (SyntaxError, UnknownFunction, MalformedNumber) carrying the
/// line/column of the offending token.
WeightExpr parse_expr(std::string_view text);

/// Canonical rendering with the minimum parentheses needed to round-trip.
std::string format(const WeightExpr& e);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_number(double value);

std::set<std::string> free_places(const WeightExpr& e);

/// Resolves a place id to its current token count; throws UnknownPlace.
using PlaceLookup = std::function<double(const std::string&)>;

double eval(const WeightExpr& e, const PlaceLookup& lookup);
double eval(const WeightExpr& e, const std::map<std::string, double>& values);

/// Flat stack program with place references resolved to marking indices.
class CompiledExpr {
public:
  using Resolver = std::function<std::optional<std::uint32_t>(const std::string&)>;

  CompiledExpr() = default;
  CompiledExpr(const WeightExpr& e, const Resolver& resolve);

  double eval(std::span<const double> marking) const;

  bool is_constant() const noexcept { return constant_.has_value(); }
  std::optional<double> constant_value() const noexcept { return constant_; }
  /// Set when the program is exactly one place read.
  std::optional<std::uint32_t> single_place() const noexcept;

private:
  enum class Op : std::uint8_t { Push, Load, Neg, Add, Sub, Mul, Div, Pow, Cos, Sin, Sqrt };
  struct Instr {
    Op op;
    std::uint32_t index;
    double value;
  };

  double run(std::span<const double> marking) const;

  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  std::optional<double> constant_;
};

}  // namespace qpn
