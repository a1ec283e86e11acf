#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "probec/crisp.hpp"
#include "probec/engine.hpp"
#include "probec/error.hpp"
#include "probec/fact_io.hpp"
#include "support/gen.hpp"

using namespace probec;
using testgen::happens;

namespace {

const RecognitionTrace* find(const std::vector<RecognitionTrace>& ts, const std::string& label,
                             const std::string& args) {
  for (const auto& t : ts) {
    if (fluent_label(t.term, t.value) == label && args_label(t.term) == args) return &t;
  }
  return nullptr;
}

double max_diff(const std::vector<RecognitionTrace>& a, const std::vector<RecognitionTrace>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].term == b[i].term);
    REQUIRE(a[i].value == b[i].value);
    REQUIRE(a[i].probs.size() == b[i].probs.size());
    for (std::size_t t = 0; t < a[i].probs.size(); ++t) worst = std::max(worst, std::fabs(a[i].probs[t] - b[i].probs[t]));
  }
  return worst;
}


}  // namespace

TEST_CASE("worked example trace") {
  auto rs = builtin_activity_rules();
  auto n = load_narrative(PROBEC_DATA_DIR "/fixtures/mike_sarah.facts");
  auto traces = recognize(rs, n);
  const auto* mv = find(traces, "moving", "mike:sarah");
  REQUIRE(mv != nullptr);
  const auto& p = mv->probs;
  REQUIRE(p.size() == 51);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.0);
  CHECK(std::fabs(p[2] - 0.70 * 0.46) < 1e-12);
  for (int t = 3; t <= 21; ++t) CHECK(p[t] == p[2]);
  double p22 = 0.70 * 0.46 + 0.69 * 0.58 - 0.70 * 0.46 * 0.69 * 0.58;
  CHECK(std::fabs(p[22] - p22) < 1e-12);
  for (int t = 23; t <= 41; ++t) CHECK(p[t] > p[t - 1]);
  CHECK(std::fabs(p[41] - 0.8) < 1e-9);
  CHECK(std::fabs(p[42] - 0.8 * 0.68) < 1e-9);
  for (int t = 43; t <= 50; ++t) CHECK(p[t] < p[t - 1]);

  double exact = recognize_exact_bdd(rs, n, mv->term, true, 22);
  CHECK(std::fabs(exact - p22) < 1e-12);
  CHECK(recognize_exact_bdd(rs, n, mv->term, true, 1) == 0.0);
}

TEST_CASE("single initiation stays flat") {
  auto rs = builtin_activity_rules();
  auto n = load_narrative(PROBEC_DATA_DIR "/fixtures/suitcase.facts");
  auto traces = recognize(rs, n);
  const auto* lo = find(traces, "leaving_object", "sarah:suitcase");
  REQUIRE(lo != nullptr);
  for (int t = 12; t <= 20; ++t) CHECK(std::fabs(lo->probs[t] - 0.6) < 1e-12);
  CHECK(std::fabs(lo->probs[21] - 0.6 * 0.4) < 1e-12);
  auto at5 = filter_recognitions(*lo, 0.5);
  CHECK(at5 == std::vector<Frame>{12, 13, 14, 15, 16, 17, 18, 19, 20});
  CHECK(filter_recognitions(*lo, 0.7).empty());
  auto at2 = filter_recognitions(*lo, 0.2);
  CHECK(std::includes(at2.begin(), at2.end(), at5.begin(), at5.end()));
}

TEST_CASE("negation helpers") {
  auto n = Narrative::index({happens("inactive", "mike", 41, 0.18), happens("inactive", "sarah", 41)});
  CHECK(negate1(Term{Symbol("inactive"), {Symbol("p2")}}, 41, n) == 1.0);
  CHECK(negate1(Term{Symbol("inactive"), {Symbol("mike")}}, 41, n) == doctest::Approx(0.82).epsilon(1e-15));
  CHECK(negate1(Term{Symbol("inactive"), {Symbol("sarah")}}, 41, n) == 0.0);
  CHECK(negate2(0.0) == 1.0);
  CHECK(negate2(1.0) == 0.0);
  CHECK(negate2(0.3) == doctest::Approx(0.7));
}

TEST_CASE("step recurrence") {
  BddManager m;
  auto wm = Formula::var(0, 0.70), ws = Formula::var(1, 0.46);
  double p2 = step(0.0, {wm && ws, Formula::bottom()}, m);
  CHECK(p2 == doctest::Approx(0.322).epsilon(1e-15));
  auto wm21 = Formula::var(2, 0.69), ws21 = Formula::var(3, 0.58);
  double p22 = step(p2, {wm21 && ws21, Formula::bottom()}, m);
  CHECK(std::fabs(p22 - 0.593) < 1e-3);
  CHECK(step(0.8, {Formula::bottom(), Formula::var(4, 0.32)}, m) == doctest::Approx(0.544).epsilon(1e-15));
  CHECK(step(0.37, {Formula::bottom(), Formula::bottom()}, m) == 0.37);
  // An initiation at the same frame as a break wins.
  CHECK(step(0.0, {Formula::top(), Formula::top()}, m) == 1.0);
}

TEST_CASE("frames and CSV labels") {
  RecognitionTrace tr{Term{Symbol("moving"), {Symbol("mike"), Symbol("sarah")}}, true, {0, 0.25, 0.6, 0.5}};
  CHECK(filter_recognitions(tr, 0.5) == std::vector<Frame>{2});
  CHECK(fluent_label(tr.term, true) == "moving");
  CHECK(fluent_label(tr.term, std::int64_t{2}) == "moving=2");
  CHECK(args_label(tr.term) == "mike:sarah");
  auto csv = trace_csv(std::span(&tr, 1));
  CHECK(csv.rfind("fluent,args,frame,probability\n", 0) == 0);
  CHECK(csv.find("moving,mike:sarah,2,0.6\n") != std::string::npos);
  CHECK(recognitions_csv(std::span(&tr, 1), 0.3) == "fluent,args,frame\nmoving,mike:sarah,2\nmoving,mike:sarah,3\n");
}

TEST_CASE("property: incremental, whole-query and enumeration agree") {
  testgen::Rng rng(1234);
  auto toy = parse_rules(testgen::toy_rules_text());
  auto kb = builtin_activity_rules();
  for (int iter = 0; iter < 150; ++iter) {
    bool use_toy = iter % 2 == 0;
    const RuleSet& rs = use_toy ? toy : kb;
    testgen::Limits lim;
    lim.frames = 6;
    lim.prob_facts = 14;
    auto n = use_toy ? testgen::random_toy(rng, lim) : testgen::random_surveillance(rng, lim);
    auto inc = recognize(rs, n);
    auto exact = recognize_exact_bdd(rs, n);
    auto worlds = recognize_enumerated(rs, n);
    CHECK(max_diff(inc, exact) < 1e-9);
    CHECK(max_diff(inc, worlds) < 1e-9);
    for (const auto& t : inc) {
      for (double p : t.probs) CHECK((p >= 0.0 && p <= 1.0));
    }
  }
}

TEST_CASE("property: inertia, growth and decay") {
  testgen::Rng rng(77);
  auto rs = parse_rules(R"(
initiatedAt(f(X) = true, T) :- happensAt(a(X), T).
terminatedAt(f(X) = true, T) :- happensAt(c(X), T).
)");
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<ProbFact> fs;
    std::vector<int> kind(12, 0);  // 0 none, 1 init only, 2 break only
    for (Frame t = 0; t < 12; ++t) {
      kind[t] = t == 0 ? 1 : static_cast<int>(rng.below(3));
      if (kind[t] == 1) fs.push_back(happens("a", "x", t, rng.prob()));
      if (kind[t] == 2) fs.push_back(happens("c", "x", t, rng.prob()));
    }
    fs.push_back(happens("tick", "x", 12));
    auto n = Narrative::index(fs);
    auto tr = recognize(rs, n);
    REQUIRE(tr.size() == 1);
    const auto& p = tr[0].probs;
    for (Frame t = 1; t < 12; ++t) {
      if (kind[t] == 0) CHECK(p[t + 1] == p[t]);
      if (kind[t] == 1 && p[t] < 1) CHECK(p[t + 1] > p[t]);
      if (kind[t] == 2 && p[t] > 0) CHECK(p[t + 1] < p[t]);
    }
  }
}

TEST_CASE("scalar state matches the exact state without shared history") {
  auto rs = builtin_activity_rules();
  auto n = load_narrative(PROBEC_DATA_DIR "/fixtures/suitcase.facts");
  CHECK(max_diff(recognize(rs, n), recognize(rs, n, {StateModel::Scalar})) < 1e-12);
}

TEST_CASE("scalar state drops correlations through derived fluents") {
  auto rs = parse_rules(testgen::toy_rules_text());
  // flag(x0) rests on one uncertain fact; link(x0,x1) is initiated twice
  // from it. The exact answer stays at P(flag); the scalar state treats
  // the two initiations as independent.
  auto n = Narrative::index({happens("c", "x0", 1, 0.5), happens("a", "x1", 2), happens("a", "x1", 3),
                             happens("b", "x9", 4)});
  auto exact = recognize(rs, n);
  auto scalar = recognize(rs, n, {StateModel::Scalar});
  const auto* le = find(exact, "link", "x0:x1");
  const auto* ls = find(scalar, "link", "x0:x1");
  REQUIRE(le != nullptr);
  REQUIRE(ls != nullptr);
  CHECK(le->probs[4] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ls->probs[4] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(recognize_exact_bdd(rs, n, le->term, true, 4) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("whole-query mode refuses oversized queries") {
  std::vector<ProbFact> fs;
  for (Frame t = 0; t < 30; ++t) fs.push_back(happens("a", "x", t, 0.5));
  auto n = Narrative::index(fs);
  auto rs = parse_rules("initiatedAt(f(X) = true, T) :- happensAt(a(X), T).");
  Term f{Symbol("f"), {Symbol("x")}};
  CHECK(recognize_exact_bdd(rs, n, f, true, 20) == doctest::Approx(1 - std::pow(0.5, 20)));
  try {
    recognize_exact_bdd(rs, n, f, true, 29);
    FAIL("expected TooManyVars");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyVars);
  }
  CHECK_THROWS_AS(recognize_enumerated(rs, n), Error);
}

TEST_CASE("property: crisp narratives give crisp traces matching the crisp engine") {
  testgen::Rng rng(99);
  auto toy = parse_rules(testgen::toy_rules_text());
  auto kb = builtin_activity_rules();
  testgen::Limits lim;
  lim.crisp = true;
  lim.frames = 12;
  for (int iter = 0; iter < 100; ++iter) {
    const RuleSet& rs = iter % 2 ? toy : kb;
    auto n = iter % 2 ? testgen::random_toy(rng, lim) : testgen::random_surveillance(rng, lim);
    auto prob = recognize(rs, n);
    auto crisp = crisp_recognize(rs, n);
    for (const auto& t : prob) {
      for (double p : t.probs) CHECK((p == 0.0 || p == 1.0));
      auto it = std::find_if(crisp.begin(), crisp.end(),
                             [&](const CrispTrace& c) { return c.term == t.term && c.value == t.value; });
      auto frames = filter_recognitions(t, 0.5);
      if (it == crisp.end()) CHECK(frames.empty());
      else CHECK(frames == it->frames);
    }
  }
}
