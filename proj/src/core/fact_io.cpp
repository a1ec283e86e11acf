#include "probec/fact_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lexer.hpp"
#include "probec/error.hpp"

namespace probec {

using detail::Tok;
using detail::Token;
using detail::TokenStream;

namespace {

std::int64_t parse_int(TokenStream& ts) {
  bool neg = ts.accept(Tok::Minus);
  const Token& t = ts.expect(Tok::Number, "integer");
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || p != t.text.data() + t.text.size()) ts.fail(t, "expected integer");
  return neg ? -v : v;
}

Term parse_term(TokenStream& ts) {
  Term term;
  term.functor = Symbol(ts.expect(Tok::Ident, "identifier").text);
  if (ts.accept(Tok::LParen)) {
    do {
      if (ts.at(Tok::Ident)) {
        term.args.emplace_back(Symbol(ts.next().text));
      } else if (ts.at(Tok::Number) || ts.at(Tok::Minus)) {
        term.args.emplace_back(parse_int(ts));
      } else {
        ts.fail(ts.peek(), "expected constant argument");
      }
    } while (ts.accept(Tok::Comma));
    ts.expect(Tok::RParen, "')'");
  }
  return term;
}

Value parse_value(TokenStream& ts) {
  if (ts.at(Tok::Ident)) {
    const Token& t = ts.next();
    if (t.text == "true") return true;
    if (t.text == "false") return false;
    ts.fail(t, "expected value (true, false, integer or (x,y))");
  }
  if (ts.accept(Tok::LParen)) {
    Coord c;
    c.x = parse_int(ts);
    ts.expect(Tok::Comma, "','");
    c.y = parse_int(ts);
    ts.expect(Tok::RParen, "')'");
    return c;
  }
  return parse_int(ts);
}

double parse_prob(TokenStream& ts) {
  const Token& t = ts.next();
  double v = 0;
  auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || p != t.text.data() + t.text.size()) ts.fail(t, "malformed probability");
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::InvalidProbability,
                std::to_string(t.line) + ":" + std::to_string(t.col) + ": probability " +
                    t.text + " outside [0,1]",
                t.line, t.col);
  }
  return v;
}

FactBody parse_body(TokenStream& ts) {
  const Token& head = ts.expect(Tok::Ident, "happensAt, holdsAt or initially");
  FactBody body;
  if (head.text == "happensAt") {
    body.kind = FactKind::Happens;
  } else if (head.text == "holdsAt") {
    body.kind = FactKind::Holds;
  } else if (head.text == "initially") {
    body.kind = FactKind::Initially;
  } else {
    ts.fail(head, "unknown fact predicate '" + head.text + "'");
  }
  ts.expect(Tok::LParen, "'('");
  body.term = parse_term(ts);
  if (body.kind != FactKind::Happens) {
    ts.expect(Tok::Eq, "'='");
    body.value = parse_value(ts);
  }
  if (body.kind != FactKind::Initially) {
    ts.expect(Tok::Comma, "','");
    const Token& at = ts.peek();
    body.frame = parse_int(ts);
    if (body.frame < 0) ts.fail(at, "frame must be non-negative");
  }
  ts.expect(Tok::RParen, "')'");
  return body;
}

}  // namespace

std::vector<ProbFact> parse_facts(std::string_view text) {
  TokenStream ts(detail::tokenize(text));
  std::vector<ProbFact> out;
  while (!ts.at(Tok::End)) {
    ProbFact f;
    if (ts.at(Tok::Number) && ts.peek(1).kind == Tok::Prob) {
      f.prob = parse_prob(ts);
      ts.next();
    }
    f.body = parse_body(ts);
    ts.expect(Tok::Dot, "'.' at end of fact");
    out.push_back(std::move(f));
  }
  return out;
}

std::string format_probability(double p) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p);
  return std::string(buf, end);
}

std::string emit_facts(std::span<const ProbFact> facts) {
  std::string out;
  for (const auto& f : facts) {
    if (f.prob != 1.0) {
      out += format_probability(f.prob);
      out += "::";
    }
    out += to_string(f.body);
    out += ".\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

Narrative load_narrative(const std::string& path) {
  try {
    return Narrative::index(parse_facts(read_file(path)));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path + ":" + e.what(), e.line(), e.column());
  }
}

std::vector<Annotation> parse_annotations(std::string_view text) {
  TokenStream ts(detail::tokenize(text));
  std::vector<Annotation> out;
  while (!ts.at(Tok::End)) {
    const Token& start = ts.peek();
    if (ts.at(Tok::Number)) ts.fail(start, "annotation facts must not carry probabilities");
    FactBody body = parse_body(ts);
    if (body.kind != FactKind::Holds) ts.fail(start, "annotation lines must be holdsAt facts");
    ts.expect(Tok::Dot, "'.' at end of fact");
    out.push_back(Annotation{std::move(body.term), body.value, body.frame});
  }
  return out;
}

}  // namespace probec
