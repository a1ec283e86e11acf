#include "doctest.h"

#include <algorithm>

#include "probec/error.hpp"
#include "probec/fact_io.hpp"
#include "probec/model.hpp"
#include "support/gen.hpp"

using namespace probec;
using testgen::happens;
using testgen::holds;

TEST_CASE("symbols intern by name and order by spelling") {
  Symbol a("mike"), b("mike"), c("sarah");
  CHECK(a == b);
  CHECK(a.key() == b.key());
  CHECK(a != c);
  CHECK(a < c);
  CHECK(Symbol().empty());
  CHECK(Symbol() == Symbol(""));
}

TEST_CASE("empty narrative") {
  auto n = Narrative::index({});
  CHECK(n.empty());
  CHECK(n.horizon() == 0);
  CHECK(n.facts_at(0).empty());
  CHECK(n.happens(0, Symbol("walking")).empty());
}

TEST_CASE("single fact narrative") {
  auto n = Narrative::index({happens("walking", "mike", 1, 0.70)});
  CHECK(n.size() == 1);
  CHECK(n.horizon() == 1);
  auto ids = n.happens(1, Symbol("walking"));
  REQUIRE(ids.size() == 1);
  CHECK(n.fact(ids[0]).prob == doctest::Approx(0.70));
  CHECK(n.happens(2, Symbol("walking")).empty());
  CHECK(n.holds(1, Symbol("walking")).empty());
}

TEST_CASE("duplicate bodies are rejected") {
  try {
    Narrative::index({happens("walking", "mike", 1, 0.7), happens("walking", "mike", 1, 0.3)});
    FAIL("expected DuplicateFact");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateFact);
  }
}

TEST_CASE("probabilities outside the unit interval are rejected") {
  CHECK_THROWS_AS(Narrative::index({happens("walking", "a", 3, 1.5)}), Error);
  CHECK_THROWS_AS(Narrative::index({happens("walking", "a", 3, -0.1)}), Error);
}

TEST_CASE("orientation is normalised into [0,360)") {
  auto n = Narrative::index({holds("orientation", "a", std::int64_t{-30}, 1),
                             holds("orientation", "b", std::int64_t{725}, 1)});
  std::vector<std::int64_t> got;
  for (auto id : n.holds(1, Symbol("orientation"))) got.push_back(std::get<std::int64_t>(n.fact(id).body.value));
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::int64_t>{5, 330});
}

TEST_CASE("crispness predicates") {
  CHECK(Narrative::index({happens("walking", "a", 1)}).all_certain());
  auto z = Narrative::index({happens("walking", "a", 1), happens("active", "a", 2, 0.0)});
  CHECK(z.is_crisp());
  CHECK_FALSE(z.all_certain());
  CHECK_FALSE(Narrative::index({happens("walking", "a", 1, 0.5)}).is_crisp());
}

TEST_CASE("STA functors") {
  for (const char* s : {"walking", "running", "active", "inactive", "abrupt"}) CHECK(is_sta_functor(Symbol(s)));
  CHECK_FALSE(is_sta_functor(Symbol("appear")));
}

TEST_CASE("property: index lookup returns exactly the matching facts") {
  testgen::Rng rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    auto n = testgen::random_surveillance(rng, {});
    std::size_t seen = 0;
    for (Frame t = 0; t <= n.horizon(); ++t) {
      for (const auto& f : n.facts_at(t)) CHECK(f.body.frame == t);
      seen += n.facts_at(t).size();
      for (const char* fn : {"walking", "coord", "appear"}) {
        Symbol s(fn);
        std::size_t expect = 0;
        for (const auto& f : n.facts()) {
          if (f.body.frame == t && f.body.term.functor == s && f.body.kind != FactKind::Initially) ++expect;
        }
        std::size_t got = n.happens(t, s).size() + n.holds(t, s).size();
        for (auto id : n.happens(t, s)) CHECK(n.fact(id).body.term.functor == s);
        CHECK(got == expect);
      }
    }
    CHECK(seen + n.initially().size() == n.size());
  }
}

TEST_CASE("property: re-serialising an indexed narrative yields the input set") {
  testgen::Rng rng(12);
  for (int iter = 0; iter < 200; ++iter) {
    auto n = testgen::random_surveillance(rng, {});
    auto again = Narrative::index(parse_facts(emit_facts(n.facts())));
    REQUIRE(again.size() == n.size());
    for (std::size_t i = 0; i < n.size(); ++i) CHECK(again.facts()[i] == n.facts()[i]);
  }
}
