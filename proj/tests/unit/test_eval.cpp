#include "doctest.h"

#include <cmath>
#include <map>

#include "probec/crisp.hpp"
#include "probec/error.hpp"
#include "probec/eval.hpp"
#include "support/gen.hpp"

using namespace probec;
using testgen::happens;
using testgen::holds;

namespace {

Annotation truth_at(const std::string& fl, std::vector<std::string> args, Frame t) {
  Term term{Symbol(fl), {}};
  for (auto& a : args) term.args.push_back(Symbol(a));
  return {term, true, t};
}

InstanceSet random_instances(testgen::Rng& rng, int n) {
  static const char* kFl[] = {"meeting", "moving", "leaving_object"};
  InstanceSet out;
  for (int i = 0; i < n; ++i) {
    std::string a = "p" + std::to_string(rng.below(3)), b = "p" + std::to_string(rng.below(3));
    out.insert(make_instance(kFl[rng.below(3)], {a, b}, static_cast<Frame>(rng.below(20))));
  }
  return out;
}

}  // namespace

TEST_CASE("metrics from table counts") {
  auto m = metrics_from_counts(3099, 1910, 525);
  CHECK(m.precision == doctest::Approx(0.619).epsilon(1e-3));
  CHECK(m.recall == doctest::Approx(0.855).epsilon(1e-3));
  CHECK(m.fmeasure == doctest::Approx(0.718).epsilon(1e-3));
  auto lo = metrics_from_counts(143, 1539, 55);
  CHECK(std::fabs(lo.precision - 0.085) < 1e-3);
  CHECK(std::fabs(lo.recall - 0.722) < 1e-3);
  CHECK(std::fabs(lo.fmeasure - 0.152) < 1e-3);
  auto zero = metrics_from_counts(0, 0, 0);
  CHECK(zero.precision == 0);
  CHECK(zero.recall == 0);
  CHECK(zero.fmeasure == 0);
  CHECK(metrics_from_counts(0, 4, 0).fmeasure == 0);
}

TEST_CASE("perfect match scores one") {
  InstanceSet s{make_instance("meeting", {"a", "b"}, 3), make_instance("meeting", {"a", "b"}, 4)};
  auto m = score(s, s);
  CHECK(m.tp == 2);
  CHECK(m.precision == 1);
  CHECK(m.recall == 1);
  CHECK(m.fmeasure == 1);
}

TEST_CASE("symmetric fluents ignore argument order") {
  CHECK(make_instance("moving", {"b", "a"}, 1) == make_instance("moving", {"a", "b"}, 1));
  CHECK(make_instance("leaving_object", {"b", "a"}, 1) != make_instance("leaving_object", {"a", "b"}, 1));
  auto rec = instances_from_csv("fluent,args,frame\nfighting,y:x,7\n");
  auto truth = instances_from_annotations(std::vector{truth_at("fighting", {"x", "y"}, 7)});
  CHECK(score(rec, truth).tp == 1);
}

TEST_CASE("recognition CSV errors") {
  CHECK_THROWS_AS(instances_from_csv("fluent,frame\n"), Error);
  try {
    instances_from_csv("fluent,args,frame\nmeeting,a:b,3\nmeeting,a:b,x\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(instances_from_csv("fluent,args,frame\nmeeting,a:b,3,0.5\n"), Error);
}

TEST_CASE("scored fluents and the aggregate row") {
  auto truth = instances_from_annotations(std::vector{truth_at("meeting", {"a", "b"}, 1), truth_at("greeting", {"a"}, 2)});
  auto fl = scored_fluents(truth);
  CHECK(fl == std::vector<std::string>{"fighting", "greeting", "leaving_object", "meeting", "moving"});
  InstanceSet rec{make_instance("meeting", {"b", "a"}, 1), make_instance("moving", {"a", "b"}, 1)};
  auto csv = metrics_csv(rec, truth, fl);
  CHECK(csv.rfind("fluent,tp,fp,fn,precision,recall,fmeasure\n", 0) == 0);
  CHECK(csv.find("meeting,1,0,0,1,1,1\n") != std::string::npos);
  CHECK(csv.find("greeting,0,0,1,0,0,0\n") != std::string::npos);
  CHECK(csv.find("all,1,1,1,0.5,0.5,0.5\n") != std::string::npos);
}

TEST_CASE("property: counts partition both sets") {
  testgen::Rng rng(404);
  for (int iter = 0; iter < 300; ++iter) {
    auto rec = random_instances(rng, rng.range(0, 30));
    auto truth = random_instances(rng, rng.range(0, 30));
    auto m = score(rec, truth);
    CHECK(m.tp + m.fn == truth.size());
    CHECK(m.tp + m.fp == rec.size());
    // Relabelling frames leaves the counts alone.
    auto shift = [](const InstanceSet& s, Frame k) {
      InstanceSet out;
      for (auto i : s) {
        i.frame = i.frame * 3 + k;
        out.insert(i);
      }
      return out;
    };
    auto m2 = score(shift(rec, 5), shift(truth, 5));
    CHECK(m2.tp == m.tp);
    CHECK(m2.fp == m.fp);
    CHECK(m2.fn == m.fn);
    std::size_t per_fluent = 0;
    for (const auto& fl : scored_fluents(truth)) per_fluent += score(rec, truth, fl).tp;
    CHECK(per_fluent == m.tp);
  }
}

TEST_CASE("object picked up by a re-entering person") {
  // p1 leaves bag1 at frame 5 and exits at 8; p2 enters at 12 and the bag
  // disappears at 16. Annotations stop at the exit and resume for p2.
  std::vector<ProbFact> fs;
  for (Frame t = 1; t <= 7; ++t) {
    fs.push_back(happens("walking", "p1", t));
    fs.push_back(holds("coord", "p1", Coord{100, 100}, t));
  }
  fs.push_back(happens("disappear", "p1", 8));
  fs.push_back(happens("appear", "bag1", 5));
  for (Frame t = 5; t <= 15; ++t) {
    fs.push_back(happens("inactive", "bag1", t));
    fs.push_back(holds("coord", "bag1", Coord{110, 100}, t));
  }
  fs.push_back(happens("disappear", "bag1", 16));
  fs.push_back(happens("appear", "p2", 12));
  for (Frame t = 12; t <= 17; ++t) {
    fs.push_back(happens("walking", "p2", t));
    fs.push_back(holds("coord", "p2", Coord{112, 100}, t));
  }
  auto n = Narrative::index(fs);
  std::vector<Annotation> truth;
  for (Frame t = 6; t <= 8; ++t) truth.push_back(truth_at("leaving_object", {"p1", "bag1"}, t));
  for (Frame t = 13; t <= 16; ++t) truth.push_back(truth_at("leaving_object", {"p2", "bag1"}, t));

  auto rec = instances_from_crisp(crisp_recognize(builtin_activity_rules(), n));
  auto m = score(rec, instances_from_annotations(truth), "leaving_object");
  CHECK(m.tp == 3);
  CHECK(m.fp == 8);  // frames 9..16 with p1 gone
  CHECK(m.fn == 4);  // the p2 pair is never initiated
}

TEST_CASE("float ranges keep the end point") {
  auto r = float_range(0.5, 8.0, 0.5);
  REQUIRE(r.size() == 16);
  CHECK(r.front() == 0.5);
  CHECK(r.back() == 8.0);
  CHECK(float_range(0.1, 0.3, 0.1).size() == 3);
  CHECK(float_range(1, 1, 0.5) == std::vector<double>{1});
}

TEST_CASE("sweep in the noise-free limit reproduces clean metrics") {
  auto rules = builtin_activity_rules();
  auto n = load_narrative(PROBEC_DATA_DIR "/fixtures/suitcase.facts");
  auto clean = filter_for_crisp(n, 0.0);
  std::vector<Annotation> truth;
  for (Frame t = 12; t <= 18; ++t) truth.push_back(truth_at("leaving_object", {"sarah", "suitcase"}, t));
  auto base = score(instances_from_crisp(crisp_recognize(rules, clean)), instances_from_annotations(truth),
                    "leaving_object");
  CHECK(base.tp == 7);
  CHECK(base.fp == 2);

  SweepConfig cfg;
  cfg.means = {1e-7};
  cfg.runs = 2;
  cfg.seed = 3;
  auto res = sweep(clean, truth, rules, cfg);
  int seen = 0;
  for (const auto& r : res.runs) {
    if (r.fluent != "leaving_object") continue;
    ++seen;
    CHECK(r.metrics.tp == base.tp);
    CHECK(r.metrics.fp == base.fp);
    CHECK(r.metrics.fn == base.fn);
  }
  CHECK(seen == 2 * 2 * 3);
}

TEST_CASE("sweep summary statistics") {
  auto rules = builtin_activity_rules();
  auto clean = load_narrative(PROBEC_DATA_DIR "/synthetic/benchmark.facts");
  auto truth = parse_annotations(read_file(PROBEC_DATA_DIR "/synthetic/benchmark.truth"));
  SweepConfig cfg;
  cfg.means = {2.0};
  cfg.runs = 3;
  cfg.seed = 5;
  auto res = sweep(clean, truth, rules, cfg);
  CHECK(res.points.size() == 2 * 3 * 5);
  std::map<std::tuple<std::string, double, std::string>, std::vector<double>> f;
  for (const auto& r : res.runs) f[{r.engine, r.threshold, r.fluent}].push_back(r.metrics.fmeasure);
  for (const auto& p : res.points) {
    const auto& xs = f[{p.engine, p.threshold, p.fluent}];
    REQUIRE(xs.size() == 3);
    double mean = (xs[0] + xs[1] + xs[2]) / 3;
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    CHECK(p.runs == 3);
    CHECK(p.f_mean == doctest::Approx(mean));
    CHECK(p.f_std == doctest::Approx(std::sqrt(var / 2)));
  }
  // The probabilistic engine is only mildly sensitive to the threshold.
  std::map<std::pair<double, std::string>, double> prob;
  for (const auto& p : res.points)
    if (p.engine == "prob") prob[{p.threshold, p.fluent}] = p.f_mean;
  CHECK(std::fabs(prob[{0.3, "all"}] - prob[{0.7, "all"}]) < 0.1);
  CHECK(sweep_seed(5, 0) != sweep_seed(5, 1));
  CHECK(sweep_seed(5, 2) == sweep_seed(5, 2));
}
