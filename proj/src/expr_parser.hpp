#pragma once

// Tokenizer and recursive-descent parser shared by the weight grammar and the
// marking-predicate grammar.

#include <string>
#include <string_view>
#include <vector>

#include "qpn/error.hpp"
#include "qpn/expr.hpp"

namespace qpn::detail {

enum class Tok {
  Number,
  Ident,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  Eq,
  Ne,
  Le,
  Ge,
  Lt,
  Gt,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

std::vector<Token> tokenize(std::string_view text, SourcePos origin = {1, 1});

class ExprParser {
public:
  explicit ExprParser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  WeightExpr expr();
  /// Throws unless every token has been consumed.
  void expect_end();

  const Token& peek(std::size_t ahead = 0) const;
  const Token& advance();
  bool accept(Tok kind);
  std::size_t mark() const noexcept { return at_; }
  void reset(std::size_t position) noexcept { at_ = position; }

  [[noreturn]] void fail(const Token& found, const std::string& expected) const;

private:
  WeightExpr term();
  WeightExpr factor();
  WeightExpr power();
  WeightExpr atom();

  std::vector<Token> toks_;
  std::size_t at_ = 0;
};

std::string describe(const Token& t);

}  // namespace qpn::detail
