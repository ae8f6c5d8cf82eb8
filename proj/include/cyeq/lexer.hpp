/* Copyright (c) 2026 the cyeq authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */
#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "cyeq/diagnostics.hpp"

namespace cyeq {

enum class Tok {
  End,
  Ident,     // also carries keywords; keyword match is case-insensitive
  Int,
  String,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Comma, Colon, Pipe, Dot, DotDot,
  Minus, Plus, Star,
  Lt, Le, Gt, Ge, Eq, Neq,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;   // identifier/keyword spelling or decoded string literal
  int64_t intValue = 0;
  Span span;
};

/// Tokenizes a full query string. Throws no exceptions; a malformed input
/// yields a FrontendError through the Result.
inline Result<std::vector<Token>> lex(const std::string& src) {
  std::vector<Token> out;
  size_t i = 0;
  const size_t n = src.size();
  auto err = [&](size_t lo, size_t hi, const std::string& msg) {
    return FrontendError{ErrorKind::Syntax, {uint32_t(lo), uint32_t(hi)}, msg};
  };

  while (i < n) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      size_t start = i;
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) ++i;
      if (i + 1 >= n) return err(start, n, "unterminated block comment");
      i += 2;
      continue;
    }

    size_t lo = i;
    auto push = [&](Tok k, size_t hi) {
      Token t;
      t.kind = k;
      t.span = {uint32_t(lo), uint32_t(hi)};
      out.push_back(std::move(t));
      i = hi;
    };

    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < n && src[j] == '.' && j + 1 < n && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        return err(lo, j + 2, "non-integer numeric literals are not supported");
      }
      Token t;
      t.kind = Tok::Int;
      t.span = {uint32_t(lo), uint32_t(j)};
      t.text = src.substr(lo, j - lo);
      try {
        t.intValue = std::stoll(t.text);
      } catch (...) {
        return err(lo, j, "integer literal out of 64-bit range");
      }
      out.push_back(std::move(t));
      i = j;
      continue;
    }

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      Token t;
      t.kind = Tok::Ident;
      t.span = {uint32_t(lo), uint32_t(j)};
      t.text = src.substr(lo, j - lo);
      out.push_back(std::move(t));
      i = j;
      continue;
    }

    if (c == '\'' || c == '"') {
      char quote = c;
      std::string val;
      size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        char d = src[j];
        if (d == '\\') {
          if (j + 1 >= n) break;
          char e = src[j + 1];
          if (e != '\\' && e != '\'' && e != '"') return err(j, j + 2, "unsupported escape sequence");
          val.push_back(e);
          j += 2;
          continue;
        }
        if (d == quote) { closed = true; ++j; break; }
        val.push_back(d);
        ++j;
      }
      if (!closed) return err(lo, n, "unterminated string literal");
      Token t;
      t.kind = Tok::String;
      t.span = {uint32_t(lo), uint32_t(j)};
      t.text = std::move(val);
      out.push_back(std::move(t));
      i = j;
      continue;
    }

    switch (c) {
      case '(': push(Tok::LParen, i + 1); break;
      case ')': push(Tok::RParen, i + 1); break;
      case '[': push(Tok::LBracket, i + 1); break;
      case ']': push(Tok::RBracket, i + 1); break;
      case '{': push(Tok::LBrace, i + 1); break;
      case '}': push(Tok::RBrace, i + 1); break;
      case ',': push(Tok::Comma, i + 1); break;
      case ':': push(Tok::Colon, i + 1); break;
      case '|': push(Tok::Pipe, i + 1); break;
      case '+': push(Tok::Plus, i + 1); break;
      case '*': push(Tok::Star, i + 1); break;
      case '-': push(Tok::Minus, i + 1); break;
      case '=': push(Tok::Eq, i + 1); break;
      case '.':
        if (i + 1 < n && src[i + 1] == '.') push(Tok::DotDot, i + 2);
        else push(Tok::Dot, i + 1);
        break;
      case '<':
        if (i + 1 < n && src[i + 1] == '=') push(Tok::Le, i + 2);
        else if (i + 1 < n && src[i + 1] == '>') push(Tok::Neq, i + 2);
        else push(Tok::Lt, i + 1);
        break;
      case '>':
        if (i + 1 < n && src[i + 1] == '=') push(Tok::Ge, i + 2);
        else push(Tok::Gt, i + 1);
        break;
      case '!':
        if (i + 1 < n && src[i + 1] == '=') push(Tok::Neq, i + 2);
        else return err(i, i + 1, "unexpected '!'");
        break;
      case '$':
        return err(i, i + 1, "parameterized queries are not part of the supported fragment");
      default:
        return err(i, i + 1, std::string("unexpected character '") + c + "'");
    }
  }

  Token end;
  end.kind = Tok::End;
  end.span = {uint32_t(n), uint32_t(n)};
  out.push_back(end);
  return out;
}

}  // namespace cyeq
