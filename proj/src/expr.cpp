#include "qpn/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "expr_parser.hpp"
#include "qpn/error.hpp"

namespace qpn {

// ---------------------------------------------------------------- tree

WeightExpr::WeightExpr() : node_(std::make_shared<const Node>()) {}

WeightExpr WeightExpr::constant(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFiniteResult, "constant must be finite");
  }
  if (std::signbit(value)) return negate(constant(-value));
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Constant;
  n->value = value;
  return WeightExpr(std::move(n));
}

WeightExpr WeightExpr::pi() {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Pi;
  return WeightExpr(std::move(n));
}

WeightExpr WeightExpr::mark(std::string place) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::MarkRef;
  n->place = std::move(place);
  return WeightExpr(std::move(n));
}

WeightExpr WeightExpr::negate(WeightExpr operand) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Negate;
  n->lhs = std::move(operand.node_);
  return WeightExpr(std::move(n));
}

WeightExpr WeightExpr::binary(ExprKind kind, WeightExpr lhs, WeightExpr rhs) {
  switch (kind) {
    case ExprKind::Add:
    case ExprKind::Subtract:
    case ExprKind::Multiply:
    case ExprKind::Divide:
    case ExprKind::Power:
      break;
    default:
      throw Error(ErrorCode::InvalidParams, "not a binary operator");
  }
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs.node_);
  n->rhs = std::move(rhs.node_);
  return WeightExpr(std::move(n));
}

WeightExpr WeightExpr::call(ExprKind kind, WeightExpr operand) {
  if (kind != ExprKind::Cos && kind != ExprKind::Sin && kind != ExprKind::Sqrt) {
    throw Error(ErrorCode::InvalidParams, "not a function");
  }
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(operand.node_);
  return WeightExpr(std::move(n));
}

WeightExpr WeightExpr::lhs() const { return WeightExpr(node_->lhs); }
WeightExpr WeightExpr::rhs() const { return WeightExpr(node_->rhs); }

bool WeightExpr::is_binary() const noexcept {
  switch (kind()) {
    case ExprKind::Add:
    case ExprKind::Subtract:
    case ExprKind::Multiply:
    case ExprKind::Divide:
    case ExprKind::Power:
      return true;
    default:
      return false;
  }
}

bool WeightExpr::is_unary() const noexcept {
  switch (kind()) {
    case ExprKind::Negate:
    case ExprKind::Cos:
    case ExprKind::Sin:
    case ExprKind::Sqrt:
      return true;
    default:
      return false;
  }
}

bool WeightExpr::is_constant() const noexcept {
  if (kind() == ExprKind::MarkRef) return false;
  if (is_unary()) return lhs().is_constant();
  if (is_binary()) return lhs().is_constant() && rhs().is_constant();
  return true;
}

bool operator==(const WeightExpr& a, const WeightExpr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::Constant: return a.value() == b.value();
    case ExprKind::Pi: return true;
    case ExprKind::MarkRef: return a.place() == b.place();
    default: break;
  }
  if (a.is_unary()) return a.lhs() == b.lhs();
  return a.lhs() == b.lhs() && a.rhs() == b.rhs();
}

// ---------------------------------------------------------------- lexer

namespace detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view text, SourcePos origin) {
  std::vector<Token> out;
  std::size_t i = 0;
  SourcePos pos = origin;
  auto bump = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
    }
  };
  auto push = [&](Tok kind, std::size_t len) {
    out.push_back(Token{kind, std::string(text.substr(i, len)), 0.0, pos});
    bump(len);
  };

  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(1);
      continue;
    }
    const char next = i + 1 < text.size() ? text[i + 1] : '\0';
    if (digit(c) || (c == '.' && digit(next))) {
      const SourcePos start = pos;
      std::size_t j = i;
      while (j < text.size() && digit(text[j])) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        if (j >= text.size() || !digit(text[j])) {
          throw Error(ErrorCode::MalformedNumber,
                      "digits required after '.' in '" + std::string(text.substr(i, j - i)) + "'",
                      start);
        }
        while (j < text.size() && digit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k >= text.size() || !digit(text[k])) {
          throw Error(ErrorCode::MalformedNumber,
                      "exponent requires digits in '" + std::string(text.substr(i, k - i)) + "'",
                      start);
        }
        while (k < text.size() && digit(text[k])) ++k;
        j = k;
      }
      if (j < text.size() && text[j] == '.') {
        throw Error(ErrorCode::MalformedNumber,
                    "unexpected '.' after '" + std::string(text.substr(i, j - i)) + "'", start);
      }
      const std::string_view lexeme = text.substr(i, j - i);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
      if (ec != std::errc() || ptr != lexeme.data() + lexeme.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::MalformedNumber,
                    "number out of range: '" + std::string(lexeme) + "'", start);
      }
      out.push_back(Token{Tok::Number, std::string(lexeme), value, start});
      bump(j - i);
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      push(Tok::Ident, j - i);
      continue;
    }
    switch (c) {
      case '+': push(Tok::Plus, 1); continue;
      case '-': push(Tok::Minus, 1); continue;
      case '*': push(Tok::Star, 1); continue;
      case '/': push(Tok::Slash, 1); continue;
      case '^': push(Tok::Caret, 1); continue;
      case '(': push(Tok::LParen, 1); continue;
      case ')': push(Tok::RParen, 1); continue;
      case '=':
        if (next == '=') { push(Tok::Eq, 2); continue; }
        break;
      case '!':
        if (next == '=') { push(Tok::Ne, 2); continue; }
        break;
      case '<':
        if (next == '=') { push(Tok::Le, 2); } else { push(Tok::Lt, 1); }
        continue;
      case '>':
        if (next == '=') { push(Tok::Ge, 2); } else { push(Tok::Gt, 1); }
        continue;
      default:
        break;
    }
    throw Error(ErrorCode::SyntaxError, "unexpected character '" + std::string(1, c) + "'", pos);
  }
  out.push_back(Token{Tok::End, "", 0.0, pos});
  return out;
}

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

// ---------------------------------------------------------------- parser

const Token& ExprParser::peek(std::size_t ahead) const {
  const std::size_t k = std::min(at_ + ahead, toks_.size() - 1);
  return toks_[k];
}

const Token& ExprParser::advance() {
  const Token& t = toks_[at_];
  if (at_ + 1 < toks_.size()) ++at_;
  return t;
}

bool ExprParser::accept(Tok kind) {
  if (peek().kind != kind) return false;
  advance();
  return true;
}

void ExprParser::fail(const Token& found, const std::string& expected) const {
  throw Error(ErrorCode::SyntaxError, "expected " + expected + " but found " + describe(found),
              found.pos);
}

void ExprParser::expect_end() {
  if (peek().kind != Tok::End) fail(peek(), "operator or end of input");
}

WeightExpr ExprParser::expr() {
  WeightExpr lhs = term();
  for (;;) {
    if (accept(Tok::Plus)) {
      lhs = WeightExpr::binary(ExprKind::Add, lhs, term());
    } else if (accept(Tok::Minus)) {
      lhs = WeightExpr::binary(ExprKind::Subtract, lhs, term());
    } else {
      return lhs;
    }
  }
}

WeightExpr ExprParser::term() {
  WeightExpr lhs = factor();
  for (;;) {
    if (accept(Tok::Star)) {
      lhs = WeightExpr::binary(ExprKind::Multiply, lhs, factor());
    } else if (accept(Tok::Slash)) {
      lhs = WeightExpr::binary(ExprKind::Divide, lhs, factor());
    } else {
      return lhs;
    }
  }
}

WeightExpr ExprParser::factor() {
  if (accept(Tok::Minus)) return WeightExpr::negate(factor());
  return power();
}

WeightExpr ExprParser::power() {
  WeightExpr base = atom();
  if (accept(Tok::Caret)) return WeightExpr::binary(ExprKind::Power, base, factor());
  return base;
}

WeightExpr ExprParser::atom() {
  static const std::string kAtom = "one of: number, 'pi', 'm(', 'cos(', 'sin(', 'sqrt(', '('";
  const Token& t = peek();
  switch (t.kind) {
    case Tok::Number:
      advance();
      return WeightExpr::constant(t.number);
    case Tok::LParen: {
      advance();
      WeightExpr inner = expr();
      if (!accept(Tok::RParen)) fail(peek(), "')'");
      return inner;
    }
    case Tok::Ident:
      break;
    default:
      fail(t, kAtom);
  }

  const Token name = advance();
  if (name.text == "pi") return WeightExpr::pi();
  if (peek().kind != Tok::LParen) {
    throw Error(ErrorCode::SyntaxError,
                "expected " + kAtom + " but found identifier '" + name.text + "'", name.pos);
  }
  if (name.text == "m") {
    advance();
    const Token& id = peek();
    if (id.kind != Tok::Ident) fail(id, "place identifier");
    advance();
    if (!accept(Tok::RParen)) fail(peek(), "')'");
    return WeightExpr::mark(id.text);
  }
  ExprKind fn;
  if (name.text == "cos") {
    fn = ExprKind::Cos;
  } else if (name.text == "sin") {
    fn = ExprKind::Sin;
  } else if (name.text == "sqrt") {
    fn = ExprKind::Sqrt;
  } else {
    throw Error(ErrorCode::UnknownFunction,
                "unknown function '" + name.text + "' (expected cos, sin, sqrt or m)", name.pos);
  }
  advance();
  WeightExpr arg = expr();
  if (!accept(Tok::RParen)) fail(peek(), "')'");
  return WeightExpr::call(fn, arg);
}

}  // namespace detail

WeightExpr parse_expr(std::string_view text) {
  detail::ExprParser p(detail::tokenize(text));
  WeightExpr e = p.expr();
  p.expect_end();
  return e;
}

// ---------------------------------------------------------------- format

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

namespace {

// Binding strength of a node as it would be parsed: 1 sum, 2 product,
// 3 unary minus, 4 power, 5 atom.
int level(const WeightExpr& e) {
  switch (e.kind()) {
    case ExprKind::Add:
    case ExprKind::Subtract: return 1;
    case ExprKind::Multiply:
    case ExprKind::Divide: return 2;
    case ExprKind::Negate: return 3;
    case ExprKind::Power: return 4;
    default: return 5;
  }
}

void render(const WeightExpr& e, std::string& out);

void render_wrapped(const WeightExpr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  render(e, out);
  if (parens) out += ')';
}

void render(const WeightExpr& e, std::string& out) {
  switch (e.kind()) {
    case ExprKind::Constant: out += format_number(e.value()); return;
    case ExprKind::Pi: out += "pi"; return;
    case ExprKind::MarkRef: out += "m(" + e.place() + ")"; return;
    case ExprKind::Negate:
      out += '-';
      render_wrapped(e.lhs(), level(e.lhs()) < 3, out);
      return;
    case ExprKind::Cos:
    case ExprKind::Sin:
    case ExprKind::Sqrt:
      out += e.kind() == ExprKind::Cos ? "cos(" : e.kind() == ExprKind::Sin ? "sin(" : "sqrt(";
      render(e.lhs(), out);
      out += ')';
      return;
    case ExprKind::Power:
      render_wrapped(e.lhs(), level(e.lhs()) < 5, out);
      out += '^';
      render_wrapped(e.rhs(), level(e.rhs()) < 3, out);
      return;
    default:
      break;
  }
  const int own = level(e);
  render_wrapped(e.lhs(), level(e.lhs()) < own, out);
  switch (e.kind()) {
    case ExprKind::Add: out += '+'; break;
    case ExprKind::Subtract: out += '-'; break;
    case ExprKind::Multiply: out += '*'; break;
    default: out += '/'; break;
  }
  render_wrapped(e.rhs(), level(e.rhs()) <= own, out);
}

void collect(const WeightExpr& e, std::set<std::string>& out) {
  if (e.kind() == ExprKind::MarkRef) {
    out.insert(e.place());
  } else if (e.is_unary()) {
    collect(e.lhs(), out);
  } else if (e.is_binary()) {
    collect(e.lhs(), out);
    collect(e.rhs(), out);
  }
}

// ---------------------------------------------------------------- arithmetic

double checked(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteResult, "expression produced a non-finite value");
  return v;
}

double do_div(double a, double b) {
  if (b == 0.0) throw Error(ErrorCode::DivisionByZero, "division by zero");
  return checked(a / b);
}

double do_sqrt(double a) {
  if (a < 0.0) throw Error(ErrorCode::NegativeSqrt, "sqrt of negative value " + format_number(a));
  return std::sqrt(a);
}

double eval_tree(const WeightExpr& e, const PlaceLookup& lookup) {
  switch (e.kind()) {
    case ExprKind::Constant: return e.value();
    case ExprKind::Pi: return std::numbers::pi;
    case ExprKind::MarkRef: return lookup(e.place());
    case ExprKind::Negate: return -eval_tree(e.lhs(), lookup);
    case ExprKind::Cos: return std::cos(eval_tree(e.lhs(), lookup));
    case ExprKind::Sin: return std::sin(eval_tree(e.lhs(), lookup));
    case ExprKind::Sqrt: return do_sqrt(eval_tree(e.lhs(), lookup));
    default: break;
  }
  const double a = eval_tree(e.lhs(), lookup);
  const double b = eval_tree(e.rhs(), lookup);
  switch (e.kind()) {
    case ExprKind::Add: return checked(a + b);
    case ExprKind::Subtract: return checked(a - b);
    case ExprKind::Multiply: return checked(a * b);
    case ExprKind::Divide: return do_div(a, b);
    default: return checked(std::pow(a, b));
  }
}

}  // namespace

std::string format(const WeightExpr& e) {
  std::string out;
  render(e, out);
  return out;
}

std::set<std::string> free_places(const WeightExpr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

double eval(const WeightExpr& e, const PlaceLookup& lookup) {
  return checked(eval_tree(e, lookup));
}

double eval(const WeightExpr& e, const std::map<std::string, double>& values) {
  return eval(e, [&](const std::string& id) {
    auto it = values.find(id);
    if (it == values.end()) throw Error(ErrorCode::UnknownPlace, "unknown place '" + id + "'");
    return it->second;
  });
}

// ---------------------------------------------------------------- compiled

namespace {

struct Emitter {
  const CompiledExpr::Resolver& resolve;
  std::size_t depth = 0;
  std::size_t max_depth = 0;

  void grow(std::size_t by) {
    depth += by;
    max_depth = std::max(max_depth, depth);
  }
};

}  // namespace

CompiledExpr::CompiledExpr(const WeightExpr& e, const Resolver& resolve) {
  Emitter em{resolve};
  auto emit = [&](auto&& self, const WeightExpr& n) -> void {
    switch (n.kind()) {
      case ExprKind::Constant:
        code_.push_back({Op::Push, 0, n.value()});
        em.grow(1);
        return;
      case ExprKind::Pi:
        code_.push_back({Op::Push, 0, std::numbers::pi});
        em.grow(1);
        return;
      case ExprKind::MarkRef: {
        auto idx = resolve(n.place());
        if (!idx) throw Error(ErrorCode::UnknownPlace, "unknown place '" + n.place() + "'");
        code_.push_back({Op::Load, *idx, 0.0});
        em.grow(1);
        return;
      }
      default:
        break;
    }
    if (n.is_unary()) {
      self(self, n.lhs());
      const Op op = n.kind() == ExprKind::Negate ? Op::Neg
                    : n.kind() == ExprKind::Cos  ? Op::Cos
                    : n.kind() == ExprKind::Sin  ? Op::Sin
                                                 : Op::Sqrt;
      code_.push_back({op, 0, 0.0});
      return;
    }
    self(self, n.lhs());
    self(self, n.rhs());
    const Op op = n.kind() == ExprKind::Add        ? Op::Add
                  : n.kind() == ExprKind::Subtract ? Op::Sub
                  : n.kind() == ExprKind::Multiply ? Op::Mul
                  : n.kind() == ExprKind::Divide   ? Op::Div
                                                   : Op::Pow;
    code_.push_back({op, 0, 0.0});
    --em.depth;
  };
  emit(emit, e);
  max_depth_ = em.max_depth;

  if (e.is_constant()) {
    try {
      constant_ = run({});
    } catch (const Error&) {
      // Left dynamic so the failure surfaces at evaluation time.
    }
  }
}

std::optional<std::uint32_t> CompiledExpr::single_place() const noexcept {
  if (code_.size() == 1 && code_[0].op == Op::Load) return code_[0].index;
  return std::nullopt;
}

double CompiledExpr::eval(std::span<const double> marking) const {
  if (constant_) return *constant_;
  return run(marking);
}

double CompiledExpr::run(std::span<const double> marking) const {
  std::array<double, 32> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > small.size()) {
    large.resize(max_depth_);
    stack = large.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Push: stack[sp++] = in.value; break;
      case Op::Load: stack[sp++] = marking[in.index]; break;
      case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Op::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
      case Op::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
      case Op::Sqrt: stack[sp - 1] = do_sqrt(stack[sp - 1]); break;
      case Op::Add: --sp; stack[sp - 1] = checked(stack[sp - 1] + stack[sp]); break;
      case Op::Sub: --sp; stack[sp - 1] = checked(stack[sp - 1] - stack[sp]); break;
      case Op::Mul: --sp; stack[sp - 1] = checked(stack[sp - 1] * stack[sp]); break;
      case Op::Div: --sp; stack[sp - 1] = do_div(stack[sp - 1], stack[sp]); break;
      case Op::Pow: --sp; stack[sp - 1] = checked(std::pow(stack[sp - 1], stack[sp])); break;
    }
  }
  return checked(stack[0]);
}

}  // namespace qpn
