#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "probec/bdd.hpp"
#include "probec/error.hpp"
#include "support/gen.hpp"

using namespace probec;

namespace {

std::vector<double> random_probs(testgen::Rng& rng, int n) {
  std::vector<double> p(n);
  for (auto& x : p) x = rng.uniform();
  return p;
}

Formula two_pair_dnf() {
  auto a = Formula::raw_var(0, 0.70), b = Formula::raw_var(1, 0.46);
  auto c = Formula::raw_var(2, 0.69), d = Formula::raw_var(3, 0.58);
  return (a && b) || (c && d);
}

}  // namespace

TEST_CASE("single variable") {
  auto b = compile(Formula::raw_var(0, 0.3));
  CHECK(b.size() == 1);
  auto& m = b.manager();
  CHECK(m.low(b.root()) == BddManager::kFalse);
  CHECK(m.high(b.root()) == BddManager::kTrue);
  CHECK(probability(b) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(world_enumeration(Formula::raw_var(0, 0.3)) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("idempotence is absorbed by reduction") {
  auto a = Formula::raw_var(0, 0.3);
  CHECK(compile(a || a) == compile(a));
  CHECK(compile(a && a) == compile(a));
}

TEST_CASE("constants") {
  CHECK(probability(compile(Formula::top())) == 1.0);
  CHECK(probability(compile(Formula::bottom())) == 0.0);
  auto a = Formula::raw_var(0, 0.4);
  CHECK(world_enumeration(a && !a) == 0.0);
  CHECK(probability(compile(a && !a)) == 0.0);
  CHECK(probability(compile(a || !a)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Formula::var(3, 1.0).is_true());
  CHECK(Formula::var(3, 0.0).is_false());
}

TEST_CASE("overlapping conjunctions") {
  auto f = two_pair_dnf();
  double expect = 0.70 * 0.46 + 0.69 * 0.58 - 0.70 * 0.46 * 0.69 * 0.58;
  CHECK(std::fabs(expect - 0.593) < 1e-3);
  auto b = compile(f);
  CHECK(b.size() == 4);
  CHECK(probability(b) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(world_enumeration(f) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(testgen::truth_table(f, {0.70, 0.46, 0.69, 0.58}) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("truth table of the compiled diagram matches the formula") {
  auto f = two_pair_dnf();
  auto b = compile(f);
  auto& m = b.manager();
  for (int w = 0; w < 16; ++w) {
    std::vector<bool> asg{bool(w & 1), bool(w & 2), bool(w & 4), bool(w & 8)};
    auto n = b.root();
    while (!m.is_terminal(n)) n = asg[m.node_var(n)] ? m.high(n) : m.low(n);
    CHECK((n == BddManager::kTrue) == f.eval(asg));
  }
}

TEST_CASE("missing variables in an order") {
  std::vector<VarIndex> order{0, 1};
  try {
    compile(two_pair_dnf(), order);
    FAIL("expected VarNotInOrder");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VarNotInOrder);
  }
  CHECK_THROWS_AS(compile(Formula::ref(0)), Error);
}

TEST_CASE("enumeration limit") {
  std::vector<Formula> vs;
  for (VarIndex i = 0; i < 26; ++i) vs.push_back(Formula::raw_var(i, 0.5));
  try {
    world_enumeration(Formula::disj(vs));
    FAIL("expected TooManyVars");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyVars);
  }
  vs.pop_back();
  CHECK(world_enumeration(Formula::conj(vs)) == doctest::Approx(std::pow(0.5, 25)));
}

TEST_CASE("dot export") {
  auto dot = to_dot(compile(two_pair_dnf()));
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(std::count(dot.begin(), dot.end(), '\n') >= 4);
}

TEST_CASE("ordered and reduced") {
  testgen::Rng rng(21);
  for (int iter = 0; iter < 200; ++iter) {
    int nv = rng.range(1, 10);
    auto f = testgen::random_formula(rng, random_probs(rng, nv), 5);
    auto b = compile(f);
    auto& m = b.manager();
    std::vector<BddManager::Node> stack{b.root()};
    std::set<std::tuple<VarIndex, BddManager::Node, BddManager::Node>> seen;
    std::set<BddManager::Node> visited;
    while (!stack.empty()) {
      auto n = stack.back();
      stack.pop_back();
      if (m.is_terminal(n) || !visited.insert(n).second) continue;
      CHECK(m.low(n) != m.high(n));
      CHECK(seen.insert({m.node_var(n), m.low(n), m.high(n)}).second);
      for (auto k : {m.low(n), m.high(n)}) {
        if (!m.is_terminal(k)) CHECK(m.node_rank(k) > m.node_rank(n));
        stack.push_back(k);
      }
    }
  }
}

TEST_CASE("property: compiled probability equals truth-table oracle under three orders") {
  testgen::Rng rng(5);
  for (int iter = 0; iter < 300; ++iter) {
    int nv = rng.range(1, 12);
    auto probs = random_probs(rng, nv);
    auto f = testgen::random_formula(rng, probs, 6);
    double truth = testgen::truth_table(f, probs);
    CHECK(std::fabs(world_enumeration(f) - truth) < 1e-12);
    std::vector<VarIndex> order(nv);
    std::iota(order.begin(), order.end(), 0);
    for (int k = 0; k < 3; ++k) {
      std::shuffle(order.begin(), order.end(), std::mt19937_64(rng.below(1u << 30)));
      CHECK(std::fabs(probability(compile(f, order)) - truth) < 1e-12);
    }
  }
}

TEST_CASE("property: equivalent formulas give identical diagrams") {
  testgen::Rng rng(9);
  for (int iter = 0; iter < 300; ++iter) {
    int nv = rng.range(1, 8);
    auto probs = random_probs(rng, nv);
    auto f = testgen::random_formula(rng, probs, 4);
    auto g = testgen::random_formula(rng, probs, 4);
    std::vector<VarIndex> order(nv);
    std::iota(order.begin(), order.end(), 0);
    auto c = [&](const Formula& h) { return compile(h, order); };
    // De Morgan, double negation and absorption leave the function unchanged.
    CHECK(c(!(f && g)) == c(!f || !g));
    CHECK(c(!!f) == c(f));
    CHECK(c(f || (f && g)) == c(f));
    auto mgr = std::make_shared<BddManager>();
    for (VarIndex v = 0; v < static_cast<VarIndex>(nv); ++v) mgr->declare(v, v, probs[v]);
    CHECK(mgr->build(f && g) == mgr->build(g && f));
    CHECK(mgr->build(f || g) == mgr->build(g || f));
  }
}

TEST_CASE("garbage collection keeps the roots intact") {
  testgen::Rng rng(4);
  BddManager m;
  auto probs = random_probs(rng, 10);
  for (VarIndex v = 0; v < 10; ++v) m.declare(v, v, probs[v]);
  std::vector<Formula> fs;
  std::vector<BddManager::Node> roots;
  for (int i = 0; i < 30; ++i) {
    fs.push_back(testgen::random_formula(rng, probs, 5));
    roots.push_back(m.build(fs.back()));
  }
  std::vector<double> before;
  for (auto r : roots) before.push_back(m.probability(r));
  std::vector<BddManager::Node> keep(roots.begin(), roots.begin() + 5);
  m.collect(keep);
  for (int i = 0; i < 5; ++i) CHECK(m.probability(keep[i]) == doctest::Approx(before[i]).epsilon(1e-15));
  for (int i = 0; i < 5; ++i) CHECK(m.build(fs[i]) == keep[i]);
}
