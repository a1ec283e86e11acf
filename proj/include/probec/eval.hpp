#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probec/crisp.hpp"
#include "probec/engine.hpp"
#include "probec/fact_io.hpp"
#include "probec/noise.hpp"

namespace probec {

struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, fmeasure = 0;
};

// Ratios from raw counts, zero where a denominator vanishes.
Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

// One activity instance at one frame. For symmetric fluents the arguments
// are sorted, so (a,b) and (b,a) name the same instance.
struct Instance {
  std::string fluent;  // label as in the CSV outputs
  std::string args;    // colon-joined
  Frame frame = 0;
  friend auto operator<=>(const Instance&, const Instance&) = default;
};

using InstanceSet = std::set<Instance>;

struct ScoringOptions {
  // Fluents scored per ordered pair as an unordered pair.
  std::vector<std::string> symmetric{"meeting", "moving", "fighting"};
};

Instance make_instance(std::string fluent, std::vector<std::string> args, Frame frame,
                       const ScoringOptions& opts = {});

InstanceSet instances_from_traces(std::span<const RecognitionTrace> traces, double threshold,
                                  const ScoringOptions& opts = {});
InstanceSet instances_from_crisp(std::span<const CrispTrace> traces, const ScoringOptions& opts = {});
InstanceSet instances_from_annotations(std::span<const Annotation> truth, const ScoringOptions& opts = {});
// Parses a `fluent,args,frame` CSV with header.
InstanceSet instances_from_csv(std::string_view csv, const ScoringOptions& opts = {});

// Frame-level counts over the instances of `fluent` (all fluents if empty).
Metrics score(const InstanceSet& recognized, const InstanceSet& truth, std::string_view fluent = {});

// Activities scored by default, plus those named in the ground truth.
std::vector<std::string> scored_fluents(const InstanceSet& truth);

// CSV `fluent,tp,fp,fn,precision,recall,fmeasure`, one row per fluent and
// a final `all` row over their union.
std::string metrics_csv(const InstanceSet& recognized, const InstanceSet& truth,
                        std::span<const std::string> fluents);

struct SweepConfig {
  std::vector<NoiseLevel> levels{NoiseLevel::Smooth};
  std::vector<double> means;
  std::vector<double> thresholds{0.3, 0.5, 0.7};
  int runs = 5;
  std::uint64_t seed = 0;
  double spurious_fraction = 0.5;
  // Empty: scored_fluents(truth).
  std::vector<std::string> fluents;
  unsigned threads = 0;  // 0: hardware concurrency
  ScoringOptions scoring;
};

// One engine's score for one noisy narrative.
struct SweepRun {
  std::string engine;  // "crisp" or "prob"
  NoiseLevel level = NoiseLevel::Smooth;
  double mean = 0;
  double threshold = 0;
  std::string fluent;  // or "all"
  int run = 0;
  Metrics metrics;
};

// Mean and sample standard deviation over runs.
struct SweepPoint {
  std::string engine;
  NoiseLevel level = NoiseLevel::Smooth;
  double mean = 0;
  double threshold = 0;
  std::string fluent;
  int runs = 0;
  double f_mean = 0, f_std = 0;
  double p_mean = 0, r_mean = 0;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<SweepPoint> points;
};

// For every (level, mean, run): injects noise with sweep_seed(seed, run), runs the probabilistic engine on the noisy narrative and the
// crisp engine on its threshold-filtered copy, and scores both per
// threshold. Results do not depend on the thread count.
SweepResult sweep(const Narrative& clean, std::span<const Annotation> truth, const RuleSet& rules,
                  const SweepConfig& cfg);

// Noise seed of run `run`. The same seed serves every level and mean, so
// points along a sweep differ only in the noise parameters.
std::uint64_t sweep_seed(std::uint64_t master, int run);

// `engine,level,gamma_mean,threshold,fluent,run,tp,fp,fn,precision,recall,fmeasure`
std::string sweep_runs_csv(const SweepResult& r);
// `engine,level,gamma_mean,threshold,fluent,runs,f_mean,f_std,precision_mean,recall_mean`
std::string sweep_summary_csv(const SweepResult& r);

// Inclusive arithmetic range lo, lo+step, ..., hi with the end point kept
// despite rounding.
std::vector<double> float_range(double lo, double hi, double step);

}  // namespace probec
