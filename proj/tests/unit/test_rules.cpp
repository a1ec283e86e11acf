#include "doctest.h"

#include <algorithm>
#include <set>

#include "probec/error.hpp"
#include "probec/rules.hpp"
#include "support/gen.hpp"

using namespace probec;

namespace {

ErrorCode code_of(std::string_view text) {
  try {
    parse_rules(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

std::set<std::string> names(const std::vector<Symbol>& v) {
  std::set<std::string> out;
  for (auto s : v) out.insert(s.name());
  return out;
}

std::int64_t close_threshold(const Rule& r) {
  for (const auto& lit : r.body) {
    if (lit.temporal() && lit.term.functor == close_symbol()) return lit.term.args[2].num;
  }
  return -1;
}

}  // namespace

TEST_CASE("moving initiation shape") {
  auto rs = parse_rules(R"(
initiatedAt(moving(P1, P2) = true, T) :-
    happensAt(walking(P1), T),
    happensAt(walking(P2), T),
    holdsAt(close(P1, P2, 34) = true, T),
    holdsAt(orientation(P1) = O1, T),
    holdsAt(orientation(P2) = O2, T),
    abs(O1 - O2) < 45.
)");
  REQUIRE(rs.rules().size() == 1);
  const Rule& r = rs.rules()[0];
  auto count = [&](Literal::Kind k) {
    return std::count_if(r.body.begin(), r.body.end(), [&](const Literal& l) { return l.kind == k; });
  };
  CHECK(count(Literal::Kind::Happens) == 2);
  CHECK(count(Literal::Kind::Holds) == 3);
  REQUIRE(count(Literal::Kind::Compare) == 1);
  const Literal& cmp = r.body.back();
  CHECK(cmp.op == CmpOp::Lt);
  CHECK(cmp.lhs.kind == Expr::Kind::Abs);
  CHECK(cmp.lhs.kids[0].kind == Expr::Kind::Sub);
  CHECK(cmp.rhs.num == 45);
  CHECK(r.schedule.size() == r.body.size());
}

TEST_CASE("schedule binds every literal's inputs first") {
  auto rs = parse_rules(R"(
initiatedAt(f(X, Y) = true, T) :-
    X != Y,
    not happensAt(b(Y), T),
    holdsAt(close(X, Y, 10) = true, T),
    happensAt(a(X), T).
)");
  const Rule& r = rs.rules()[0];
  CHECK(r.body[r.schedule.front()].kind == Literal::Kind::Happens);
  CHECK(r.body[r.schedule.back()].kind != Literal::Kind::Holds);
}

TEST_CASE("rule errors") {
  CHECK(code_of("initiatedAt(f(X) = true, T) :- happensAt(a(Y), T).") == ErrorCode::UnboundHeadVariable);
  CHECK(code_of("initiatedAt(f(X) = true, T) :- happensAt(a(X), T), not happensAt(b(Z), T).") ==
        ErrorCode::UnsafeVariable);
  CHECK(code_of("initiatedAt(f(X) = true, T) :- happensAt(a(X), T), Y < 3.") == ErrorCode::UnsafeVariable);
  CHECK(code_of(R"(
initiatedAt(f(X) = true, T) :- happensAt(a(X), T), holdsAt(g(X) = true, T).
initiatedAt(g(X) = true, T) :- happensAt(a(X), T), holdsAt(f(X) = true, T).
)") == ErrorCode::CyclicFluentDependency);
  CHECK(code_of("initiatedAt(f(X) = true, T) :- happensAt(a(X), T), holdsAt(h(X) = true, T).") ==
        ErrorCode::UnknownFluent);
  CHECK(code_of("terminatedAt(f(X) = true, T) :- happensAt(a(X), T).") == ErrorCode::UnknownFluent);
  CHECK(code_of("initiatedAt(f(X) = true, S) :- happensAt(a(X), T).") == ErrorCode::Parse);
  CHECK(code_of("initiatedAt(f(X) = V, T) :- happensAt(a(X), T).") == ErrorCode::Parse);
  CHECK(code_of("initiatedAt(close(X, Y, 3) = true, T) :- happensAt(a(X), T), happensAt(a(Y), T).") ==
        ErrorCode::Parse);
  CHECK(code_of("initiatedAt(f(X) = true, T) happensAt(a(X), T).") == ErrorCode::Parse);
}

TEST_CASE("head variables of terminations may be bound by the head alone") {
  auto rs = parse_rules(R"(
initiatedAt(m(X, Y) = true, T) :- happensAt(a(X), T), happensAt(a(Y), T).
terminatedAt(m(X, Y) = true, T) :- happensAt(b(X), T).
)");
  CHECK(rs.terminations(Symbol("m")).size() == 1);
}

TEST_CASE("cycle message names the path") {
  try {
    parse_rules(R"(
initiatedAt(f(X) = true, T) :- happensAt(a(X), T), holdsAt(g(X) = true, T).
initiatedAt(g(X) = true, T) :- happensAt(a(X), T), holdsAt(f(X) = true, T).
)");
    FAIL("expected a cycle");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("f") != std::string::npos);
    CHECK(msg.find("g") != std::string::npos);
    CHECK(e.line() > 0);
  }
}

TEST_CASE("bundled knowledge base") {
  auto rs = builtin_activity_rules();
  CHECK(names(rs.derived()) == std::set<std::string>{"person", "leaving_object", "meeting", "moving", "fighting"});
  CHECK(names(rs.builtins()) == std::set<std::string>{"close", "distance"});
  auto pos = [&](const char* f) { return std::find(rs.derived().begin(), rs.derived().end(), Symbol(f)); };
  CHECK(pos("person") < pos("meeting"));
  CHECK(pos("person") < pos("leaving_object"));
  CHECK(rs.initiations(Symbol("meeting")).size() == 2);
  CHECK(rs.initiations(Symbol("person")).size() == 4);
  CHECK(close_threshold(*rs.initiations(Symbol("leaving_object"))[0]) == 30);
  CHECK(close_threshold(*rs.initiations(Symbol("fighting"))[0]) == 44);
  CHECK(close_threshold(*rs.initiations(Symbol("moving"))[0]) == 34);
  CHECK(close_threshold(*rs.initiations(Symbol("meeting"))[1]) == 25);
  CHECK(rs.terminations(Symbol("moving")).size() == 6);
  CHECK(rs.terminations(Symbol("fighting")).size() == 6);
  CHECK(rs.is_input(Symbol("coord")));
  CHECK(rs.is_input(Symbol("orientation")));
  CHECK(rs.is_builtin(close_symbol()));
  CHECK(builtin_activity_rules_text().find("leaving_object_mi") != std::string_view::npos);
}

TEST_CASE("moving compares the orientations of both people") {
  auto rs = builtin_activity_rules();
  const Rule& r = *rs.initiations(Symbol("moving"))[0];
  std::vector<VarId> who;
  for (const auto& lit : r.body) {
    if (lit.temporal() && lit.term.functor == Symbol("orientation")) who.push_back(lit.term.args[0].var);
  }
  REQUIRE(who.size() == 2);
  CHECK(who[0] != who[1]);
}

TEST_CASE("input directive") {
  auto rs = parse_rules(R"(
:- input(zone).
initiatedAt(inside(X) = true, T) :- happensAt(a(X), T), holdsAt(zone(X) = 3, T).
)");
  CHECK(rs.is_input(Symbol("zone")));
  CHECK_FALSE(rs.is_derived(Symbol("zone")));
  CHECK_THROWS_AS(parse_rules(":- input(zone).\ninitiatedAt(zone(X) = 1, T) :- happensAt(a(X), T)."), Error);
}

TEST_CASE("pretty printing round trips") {
  for (auto text : {builtin_activity_rules_text(), std::string_view(testgen::toy_rules_text())}) {
    auto rs = parse_rules(text);
    auto again = parse_rules(rs.pretty());
    CHECK(structurally_equal(rs, again));
    CHECK(again.pretty() == rs.pretty());
  }
}

TEST_CASE("structural equality notices changed thresholds") {
  auto a = parse_rules("initiatedAt(f(X, Y) = true, T) :- happensAt(a(X), T), holdsAt(close(X, Y, 10) = true, T).");
  auto b = parse_rules("initiatedAt(f(X, Y) = true, T) :- happensAt(a(X), T), holdsAt(close(X, Y, 11) = true, T).");
  CHECK_FALSE(structurally_equal(a, b));
  CHECK(structurally_equal(a, a));
}

TEST_CASE("load_rules prefixes the path on errors") {
  try {
    load_rules("/nonexistent.rules");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}
