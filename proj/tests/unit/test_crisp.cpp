#include "doctest.h"

#include <algorithm>
#include <map>

#include "probec/crisp.hpp"
#include "probec/error.hpp"
#include "support/gen.hpp"

using namespace probec;
using testgen::happens;
using testgen::holds;

namespace {

const char* kSimple = R"(
initiatedAt(f(X) = true, T) :- happensAt(start(X), T).
terminatedAt(f(X) = true, T) :- happensAt(stop(X), T).
)";

std::vector<Frame> run_simple(std::initializer_list<Frame> inits, std::initializer_list<Frame> terms) {
  std::vector<ProbFact> fs;
  for (Frame t : inits) fs.push_back(happens("start", "x", t));
  for (Frame t : terms) fs.push_back(happens("stop", "x", t));
  fs.push_back(happens("tick", "x", 40));
  auto rs = parse_rules(kSimple);
  return crisp_holds_stream(Term{Symbol("f"), {Symbol("x")}}, true, rs, Narrative::index(fs));
}

std::vector<Frame> span(Frame a, Frame b) {
  std::vector<Frame> v;
  for (Frame t = a; t <= b; ++t) v.push_back(t);
  return v;
}

bool initiated_moving(std::int64_t o1, std::int64_t o2) {
  auto rs = builtin_activity_rules();
  auto n = Narrative::index({happens("walking", "p1", 1), happens("walking", "p2", 1),
                             holds("coord", "p1", Coord{0, 0}, 1), holds("coord", "p2", Coord{10, 0}, 1),
                             holds("orientation", "p1", o1, 1), holds("orientation", "p2", o2, 1)});
  CrispEngine e(rs, n);
  e.advance();
  return e.initiated(Term{Symbol("moving"), {Symbol("p1"), Symbol("p2")}}, true);
}

}  // namespace

TEST_CASE("interval scenarios") {
  CHECK(run_simple({20}, {30}) == span(21, 30));
  CHECK(run_simple({10, 20}, {30}) == span(11, 30));
  CHECK(run_simple({10, 20}, {25, 30}) == span(11, 25));
}

TEST_CASE("moving initiation depends on orientation") {
  CHECK(initiated_moving(100, 60));
  CHECK_FALSE(initiated_moving(100, 160));
}

TEST_CASE("fighting blocked by an inactive partner") {
  auto rs = builtin_activity_rules();
  Term fight{Symbol("fighting"), {Symbol("p1"), Symbol("p2")}};
  std::vector<ProbFact> base{happens("abrupt", "p1", 1), holds("coord", "p1", Coord{0, 0}, 1),
                             holds("coord", "p2", Coord{40, 0}, 1)};
  {
    auto n = Narrative::index(base);
    CrispEngine e(rs, n);
    e.advance();
    CHECK(e.initiated(fight, true));
  }
  base.push_back(happens("inactive", "p2", 1));
  auto n = Narrative::index(base);
  CrispEngine e(rs, n);
  e.advance();
  CHECK_FALSE(e.initiated(fight, true));
}

TEST_CASE("initially holds until broken") {
  auto rs = parse_rules(kSimple);
  auto n = Narrative::index({{{FactKind::Initially, Term{Symbol("f"), {Symbol("x")}}, true, 0}, 1.0},
                             happens("stop", "x", 4), happens("tick", "x", 6)});
  auto frames = crisp_holds_stream(Term{Symbol("f"), {Symbol("x")}}, true, rs, n);
  CHECK(frames == span(0, 4));
}

TEST_CASE("non-crisp input is rejected") {
  auto rs = parse_rules(kSimple);
  auto n = Narrative::index({happens("start", "x", 1, 0.4)});
  try {
    crisp_recognize(rs, n);
    FAIL("expected NotCrisp");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotCrisp);
  }
}

TEST_CASE("zero-probability facts are absent") {
  auto rs = parse_rules(kSimple);
  auto n = Narrative::index({happens("start", "x", 1, 0.0), happens("start", "x", 3), happens("tick", "x", 5)});
  CHECK(crisp_holds_stream(Term{Symbol("f"), {Symbol("x")}}, true, rs, n) == span(4, 5));
}

TEST_CASE("property: forward scan equals the inertia axioms") {
  testgen::Rng rng(31);
  auto rs = parse_rules(testgen::toy_rules_text());
  testgen::Limits lim;
  lim.crisp = true;
  lim.frames = 14;
  for (int iter = 0; iter < 200; ++iter) {
    auto n = testgen::random_toy(rng, lim);
    auto traces = crisp_recognize(rs, n);

    // Per-frame initiation and termination sets, plus the holding status.
    struct Frames {
      std::vector<bool> init, term, hold;
    };
    std::map<std::pair<std::string, std::string>, Frames> by_atom;
    CrispEngine e(rs, n);
    const auto horizon = static_cast<std::size_t>(n.horizon());
    for (std::size_t t = 0; t <= horizon; ++t) {
      for (const auto& tr : traces) {
        auto key = std::make_pair(to_string(tr.term), to_string(tr.value));
        auto& f = by_atom[key];
        f.init.resize(horizon + 1);
        f.term.resize(horizon + 1);
        f.hold.resize(horizon + 1);
        f.init[t] = e.initiated(tr.term, tr.value);
        f.term[t] = e.terminated(tr.term, tr.value);
        f.hold[t] = e.holds(tr.term, tr.value);
      }
      if (t < horizon) e.advance();
    }

    std::map<std::string, std::vector<const CrispTrace*>> values_of;
    for (const auto& tr : traces) values_of[to_string(tr.term)].push_back(&tr);

    for (const auto& tr : traces) {
      const auto& me = by_atom[{to_string(tr.term), to_string(tr.value)}];
      auto broken = [&](std::size_t u) {
        if (me.term[u]) return true;
        for (const auto* other : values_of[to_string(tr.term)]) {
          if (other->value != tr.value && by_atom[{to_string(other->term), to_string(other->value)}].init[u]) return true;
        }
        return false;
      };
      bool initially = me.hold[0];
      std::vector<Frame> expect;
      for (std::size_t T = 0; T <= horizon; ++T) {
        bool h = false;
        if (initially) {
          h = true;
          for (std::size_t u = 1; u < T; ++u) h = h && !broken(u);
        }
        for (std::size_t ts = 0; ts < T && !h; ++ts) {
          if (!me.init[ts]) continue;
          bool ok = true;
          for (std::size_t u = ts + 1; u < T; ++u) ok = ok && !broken(u);
          h = ok;
        }
        if (h) expect.push_back(static_cast<Frame>(T));
      }
      CHECK(tr.frames == expect);
    }
  }
}

TEST_CASE("property: inertia without events") {
  testgen::Rng rng(32);
  auto rs = parse_rules(kSimple);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<ProbFact> fs;
    std::vector<bool> event(30);
    for (Frame t = 0; t < 30; ++t) {
      if (rng.chance(0.15)) { fs.push_back(happens("start", "x", t)); event[t] = true; }
      if (rng.chance(0.15)) { fs.push_back(happens("stop", "x", t)); event[t] = true; }
    }
    fs.push_back(happens("tick", "x", 30));
    auto frames = crisp_holds_stream(Term{Symbol("f"), {Symbol("x")}}, true, rs, Narrative::index(fs));
    auto holds_at = [&](Frame t) { return std::binary_search(frames.begin(), frames.end(), t); };
    for (Frame t = 1; t < 30; ++t) {
      if (!event[t]) CHECK(holds_at(t + 1) == holds_at(t));
    }
  }
}

TEST_CASE("multi-valued fluents hold at most one value when initiations do not collide") {
  testgen::Rng rng(33);
  auto rs = parse_rules(testgen::toy_rules_text());
  testgen::Limits lim;
  lim.crisp = true;
  lim.frames = 14;
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<ProbFact> fs;
    for (Frame t = 0; t <= 14; ++t) {
      // a and b never share a frame, so mood=1 and mood=2 are never
      // initiated together.
      switch (rng.below(4)) {
        case 0: fs.push_back(happens("a", "x0", t)); break;
        case 1: fs.push_back(happens("b", "x0", t)); break;
        case 2: fs.push_back(happens("c", "x0", t)); break;
        default: break;
      }
    }
    fs.push_back(happens("c", "x1", 15));
    auto n = Narrative::index(fs);
    auto traces = crisp_recognize(rs, n);
    for (Frame t = 0; t <= n.horizon(); ++t) {
      int count = 0;
      for (const auto& tr : traces) {
        if (tr.term.functor == Symbol("mood") && std::binary_search(tr.frames.begin(), tr.frames.end(), t)) ++count;
      }
      CHECK(count <= 1);
    }
  }
}
