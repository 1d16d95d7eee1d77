#pragma once

#include <string>
#include <string_view>

#include "spump/gait.hpp"

namespace spump::dsl {

enum class Tok { Ident, Number, Equals, LBrace, RBrace, Newline, End, Invalid };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  SourceLocation where;
  double number = 0.0;
};

// Line-oriented tokenizer; `#` comments run to end of line.
class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }
  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance();

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
  Token current_;
};

std::string describe(const Token& token);

}  // namespace spump::dsl
