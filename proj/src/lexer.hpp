#pragma once

// Tokenizer shared by the formula parsers (FO, ML, Presburger, QBF).

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pnmc/errors.hpp"

namespace pnmc::detail {

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

inline std::vector<Token> tokenize(std::string_view s) {
  static const char* symbols[] = {"<=>", "->*", "->+", "->", "=>", "<=", ">=", "!=", "(", ")", "{", "}", ".",
                                  ",",   "!",   "&",   "|",  "=",  "<",  ">",  "+",  "-", "*", "~", ":"};
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), line, col});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Number, std::string(s.substr(i, j - i)), line, col});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* sym : symbols) {
      std::string_view sv(sym);
      if (s.substr(i, sv.size()) == sv) {
        out.push_back({Tok::Sym, std::string(sv), line, col});
        advance(sv.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class TokenStream {
 public:
  explicit TokenStream(std::string_view text) : toks_(tokenize(text)) {}

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_sym(std::string_view s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool at_word(std::string_view s) const { return peek().kind == Tok::Ident && peek().text == s; }
  bool accept_sym(std::string_view s) {
    if (!at_sym(s)) return false;
    next();
    return true;
  }
  bool accept_word(std::string_view s) {
    if (!at_word(s)) return false;
    next();
    return true;
  }
  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) fail("expected '" + std::string(s) + "'");
  }
  std::string expect_ident() {
    if (peek().kind != Tok::Ident) fail("expected identifier");
    return next().text;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  void expect_end() {
    if (!at_end()) fail("unexpected '" + peek().text + "'");
  }
  std::size_t position() const { return pos_; }
  void rewind(std::size_t pos) { pos_ = pos; }
  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    throw ParseError(msg + (t.kind == Tok::End ? " at end of input" : ""), t.line, t.column);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace pnmc::detail
