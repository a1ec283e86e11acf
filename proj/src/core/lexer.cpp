#include "lexer.hpp"

#include <cctype>

namespace probec::detail {

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

const char* describe(Tok kind) {
  switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Variable: return "variable";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Eq: return "'='";
    case Tok::Neq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Minus: return "'-'";
    case Tok::Plus: return "'+'";
    case Tok::Prob: return "'::'";
    case Tok::Neck: return "':-'";
    case Tok::End: return "end of input";
  }
  return "token";
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto emit = [&](Tok kind, std::size_t len) {
    out.push_back(Token{kind, std::string(text.substr(i, len)), line, col});
    advance(len);
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == '%') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      bool var = std::isupper(static_cast<unsigned char>(c)) || c == '_';
      emit(var ? Tok::Variable : Tok::Ident, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      // A '.' is part of the number only when a digit follows; otherwise it
      // terminates the clause.
      if (j + 1 < text.size() && text[j] == '.' &&
          std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      emit(Tok::Number, j - i);
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == "::") { emit(Tok::Prob, 2); continue; }
    if (two == ":-") { emit(Tok::Neck, 2); continue; }
    if (two == "!=" || two == "\\=") { emit(Tok::Neq, 2); continue; }
    if (two == "<=" || two == "=<") { emit(Tok::Le, 2); continue; }
    if (two == ">=") { emit(Tok::Ge, 2); continue; }
    switch (c) {
      case '(': emit(Tok::LParen, 1); continue;
      case ')': emit(Tok::RParen, 1); continue;
      case ',': emit(Tok::Comma, 1); continue;
      case '.': emit(Tok::Dot, 1); continue;
      case '=': emit(Tok::Eq, 1); continue;
      case '<': emit(Tok::Lt, 1); continue;
      case '>': emit(Tok::Gt, 1); continue;
      case '-': emit(Tok::Minus, 1); continue;
      case '+': emit(Tok::Plus, 1); continue;
      default:
        throw Error(ErrorCode::Parse,
                    std::to_string(line) + ":" + std::to_string(col) +
                        ": unexpected character '" + std::string(1, c) + "'",
                    line, col);
    }
  }
  out.push_back(Token{Tok::End, "", line, col});
  return out;
}

const Token& TokenStream::expect(Tok k, const char* what) {
  if (!at(k)) {
    fail(peek(), std::string("expected ") + what + ", found " +
                     (peek().kind == Tok::End ? std::string("end of input")
                                              : "'" + peek().text + "'"));
  }
  return next();
}

void TokenStream::fail(const Token& tok, const std::string& reason) const {
  throw Error(ErrorCode::Parse,
              std::to_string(tok.line) + ":" + std::to_string(tok.col) + ": " + reason,
              tok.line, tok.col);
}

}  // namespace probec::detail
