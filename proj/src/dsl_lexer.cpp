#include "dsl_lexer.hpp"

#include <charconv>

namespace spump::dsl {

namespace {

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

}  // namespace

void Lexer::advance() {
  while (pos_ < text_.size()) {
    const char c = text_[pos_];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++pos_;
    } else if (c == '#') {
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    } else {
      break;
    }
  }
  Token t;
  t.where = {line_, static_cast<int>(pos_ - line_start_) + 1};
  if (pos_ >= text_.size()) {
    t.kind = Tok::End;
    current_ = t;
    return;
  }
  const std::size_t begin = pos_;
  const char c = text_[pos_];
  if (c == '\n') {
    t.kind = Tok::Newline;
    ++pos_;
    ++line_;
    line_start_ = pos_;
  } else if (c == '=') {
    t.kind = Tok::Equals;
    ++pos_;
  } else if (c == '{') {
    t.kind = Tok::LBrace;
    ++pos_;
  } else if (c == '}') {
    t.kind = Tok::RBrace;
    ++pos_;
  } else if (is_ident_start(c)) {
    t.kind = Tok::Ident;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
  } else if (is_digit(c) || c == '-' || c == '+' || c == '.') {
    // [+-]? (digits [. digits?] | . digits) ([eE] [+-]? digits)?
    std::size_t p = pos_;
    if (text_[p] == '-' || text_[p] == '+') ++p;
    const std::size_t mantissa = p;
    while (p < text_.size() && is_digit(text_[p])) ++p;
    bool digits = p > mantissa;
    if (p < text_.size() && text_[p] == '.') {
      ++p;
      const std::size_t frac = p;
      while (p < text_.size() && is_digit(text_[p])) ++p;
      digits = digits || p > frac;
    }
    if (digits && p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < text_.size() && (text_[q] == '-' || text_[q] == '+')) ++q;
      if (q < text_.size() && is_digit(text_[q])) {
        while (q < text_.size() && is_digit(text_[q])) ++q;
        p = q;
      }
    }
    if (!digits) {
      t.kind = Tok::Invalid;
      pos_ = p > pos_ ? p : pos_ + 1;
    } else {
      const char* first = text_.data() + pos_;
      if (*first == '+') ++first;
      const auto res = std::from_chars(first, text_.data() + p, t.number);
      t.kind = res.ec == std::errc() ? Tok::Number : Tok::Invalid;
      pos_ = p;
    }
  } else {
    t.kind = Tok::Invalid;
    // Swallow a whole UTF-8 sequence so columns stay on character starts.
    ++pos_;
    while (pos_ < text_.size() &&
           (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80)
      ++pos_;
  }
  t.text = text_.substr(begin, pos_ - begin);
  current_ = t;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of file";
    default: return "'" + std::string(t.text) + "'";
  }
}

}  // namespace spump::dsl
