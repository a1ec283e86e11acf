#pragma once

// Tokenizer shared by the fact and rule parsers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "probec/error.hpp"

namespace probec::detail {

enum class Tok {
  Ident,     // lower-case initial
  Variable,  // upper-case or '_' initial
  Number,    // integer or decimal, no sign
  LParen,
  RParen,
  Comma,
  Dot,
  Eq,        // =
  Neq,       // != or \=
  Lt,
  Le,        // <= or =<
  Gt,
  Ge,
  Minus,
  Plus,
  Prob,      // ::
  Neck,      // :-
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t col;
};

std::vector<Token> tokenize(std::string_view text);

const char* describe(Tok kind);

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return peek().kind == k; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  const Token& expect(Tok k, const char* what);

  [[noreturn]] void fail(const Token& at, const std::string& reason) const;

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace probec::detail
