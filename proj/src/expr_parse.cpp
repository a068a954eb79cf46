#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "covspec/detail/numfmt.hpp"
#include "covspec/errors.hpp"
#include "covspec/expr.hpp"

namespace covspec {

namespace {

struct Token {
  enum Kind { Ident, Number, Bracket, LParen, RParen, Prime, Hash, Plus, Minus, Star, Dot, End };
  Kind kind;
  std::string text;  // Ident name or raw bracket payload
  double num = 0.0;
  std::size_t pos = 0;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i + 1;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Token::Ident, src.substr(i, j - i), 0.0, start});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      auto parsed = detail::parse_double_prefix(std::string_view(src).substr(i));
      if (!parsed) throw ParseError("malformed number", start);
      out.push_back({Token::Number, src.substr(i, parsed->second), parsed->first, start});
      i += parsed->second;
      continue;
    }
    switch (c) {
      case '(': out.push_back({Token::LParen, "(", 0.0, start}); break;
      case ')': out.push_back({Token::RParen, ")", 0.0, start}); break;
      case '\'': out.push_back({Token::Prime, "'", 0.0, start}); break;
      case '#': out.push_back({Token::Hash, "#", 0.0, start}); break;
      case '+': out.push_back({Token::Plus, "+", 0.0, start}); break;
      case '-': out.push_back({Token::Minus, "-", 0.0, start}); break;
      case '*': out.push_back({Token::Star, "*", 0.0, start}); break;
      case '.': out.push_back({Token::Dot, ".", 0.0, start}); break;
      case '[': {
        std::size_t j = src.find(']', i + 1);
        if (j == std::string::npos) throw ParseError("unterminated '['", start);
        out.push_back({Token::Bracket, src.substr(i + 1, j - i - 1), 0.0, start});
        i = j + 1;
        continue;
      }
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
    ++i;
  }
  out.push_back({Token::End, "", 0.0, n});
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  OperatorExpr run() {
    OperatorExpr e = parse_expr();
    if (peek().kind != Token::End) throw ParseError("trailing input", peek().pos);
    return normalize(e);
  }

 private:
  const Token& peek() const { return toks_[idx_]; }
  Token take() { return toks_[idx_++]; }
  bool accept(Token::Kind k) {
    if (peek().kind == k) {
      ++idx_;
      return true;
    }
    return false;
  }

  // expr := ['-'] scaled (('+'|'-') scaled)*
  OperatorExpr parse_expr() {
    std::vector<std::pair<double, OperatorExpr>> arms;
    double sign = accept(Token::Minus) ? -1.0 : 1.0;
    arms.push_back(parse_scaled(sign));
    for (;;) {
      if (accept(Token::Plus))
        arms.push_back(parse_scaled(1.0));
      else if (accept(Token::Minus))
        arms.push_back(parse_scaled(-1.0));
      else
        break;
    }
    if (arms.size() == 1) {
      auto& [c, e] = arms.front();
      return c == 1.0 ? e : OperatorExpr::scale(c, e);
    }
    return OperatorExpr::sum(std::move(arms));
  }

  // scaled := [NUMBER ['*']] tensor_chain
  std::pair<double, OperatorExpr> parse_scaled(double sign) {
    double c = sign;
    if (peek().kind == Token::Number) {
      c *= take().num;
      accept(Token::Star);
    }
    return {c, parse_tensor_chain()};
  }

  // tensor_chain := compose_seq ('#' compose_seq)*
  OperatorExpr parse_tensor_chain() {
    std::vector<OperatorExpr> parts{parse_compose_seq()};
    while (accept(Token::Hash)) parts.push_back(parse_compose_seq());
    return OperatorExpr::tensor(std::move(parts));
  }

  // compose_seq := factor (['.'] factor)*
  OperatorExpr parse_compose_seq() {
    std::vector<OperatorExpr> fs{parse_factor()};
    for (;;) {
      accept(Token::Dot);
      if (peek().kind == Token::Ident || peek().kind == Token::LParen)
        fs.push_back(parse_factor());
      else
        break;
    }
    return OperatorExpr::compose(std::move(fs));
  }

  // factor := primary "'"*
  OperatorExpr parse_factor() {
    OperatorExpr e = parse_primary();
    while (accept(Token::Prime)) e = e.adj();
    return e;
  }

  OperatorExpr parse_primary() {
    if (accept(Token::LParen)) {
      OperatorExpr e = parse_expr();
      if (!accept(Token::RParen)) throw ParseError("expected ')'", peek().pos);
      return e;
    }
    if (peek().kind != Token::Ident)
      throw ParseError("expected atom or '('", peek().pos);
    Token id = take();
    bool has_bracket = peek().kind == Token::Bracket;
    if (id.text == "I" || id.text == "T" || id.text == "P" || id.text == "R") {
      if (has_bracket) throw ParseError("atom '" + id.text + "' takes no parameter", peek().pos);
      if (id.text == "I") return OperatorExpr::identity();
      if (id.text == "T") return OperatorExpr::left_integration();
      if (id.text == "P") return OperatorExpr::const_projector();
      return OperatorExpr::flip();
    }
    if (id.text == "S") {
      if (!has_bracket) throw ParseError("atom 'S' requires [name]", id.pos);
      Token b = take();
      std::string name = trim(b.text);
      if (name.empty()) throw ParseError("empty weight name in S[...]", b.pos);
      return OperatorExpr::multiplier(name);
    }
    if (id.text == "Ta") {
      if (!has_bracket) throw ParseError("atom 'Ta' requires [alpha]", id.pos);
      Token b = take();
      std::string body = trim(b.text);
      auto parsed = detail::parse_double_prefix(body);
      if (!parsed || parsed->second != body.size())
        throw ParseError("Ta[...] expects a real number", b.pos);
      if (!(parsed->first > 0.5)) throw ParseError("Ta[alpha] requires alpha > 1/2", b.pos);
      return OperatorExpr::rl_integration(parsed->first);
    }
    if (id.text == "Pn") {
      if (!has_bracket) throw ParseError("atom 'Pn' requires [order]", id.pos);
      Token b = take();
      std::string body = trim(b.text);
      int order = 0;
      auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), order);
      if (ec != std::errc{} || p != body.data() + body.size() || order < 0)
        throw ParseError("Pn[...] expects a non-negative integer", b.pos);
      return OperatorExpr::poly_projector(order);
    }
    throw ParseError("unknown atom name '" + id.text + "'", id.pos);
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

}  // namespace

OperatorExpr parse(const std::string& text) { return Parser(text).run(); }

}  // namespace covspec
