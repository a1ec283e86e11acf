#include "probec/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <thread>

#include "probec/error.hpp"

namespace probec {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto end = s.find(sep, start);
    out.emplace_back(s.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) return out;
    start = end + 1;
  }
}

std::vector<std::string> arg_names(const Term& t) {
  std::vector<std::string> out;
  out.reserve(t.args.size());
  for (const auto& a : t.args) out.push_back(to_string(a));
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ':';
    out += parts[i];
  }
  return out;
}

}  // namespace

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.fmeasure = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

Instance make_instance(std::string fluent, std::vector<std::string> args, Frame frame,
                       const ScoringOptions& opts) {
  if (std::find(opts.symmetric.begin(), opts.symmetric.end(), fluent) != opts.symmetric.end()) {
    std::sort(args.begin(), args.end());
  }
  return Instance{std::move(fluent), join(args), frame};
}

InstanceSet instances_from_traces(std::span<const RecognitionTrace> traces, double threshold,
                                  const ScoringOptions& opts) {
  InstanceSet out;
  for (const auto& tr : traces) {
    auto frames = filter_recognitions(tr, threshold);
    if (frames.empty()) continue;
    std::string label = fluent_label(tr.term, tr.value);
    auto args = arg_names(tr.term);
    for (Frame t : frames) out.insert(make_instance(label, args, t, opts));
  }
  return out;
}

InstanceSet instances_from_crisp(std::span<const CrispTrace> traces, const ScoringOptions& opts) {
  InstanceSet out;
  for (const auto& tr : traces) {
    std::string label = fluent_label(tr.term, tr.value);
    auto args = arg_names(tr.term);
    for (Frame t : tr.frames) out.insert(make_instance(label, args, t, opts));
  }
  return out;
}

InstanceSet instances_from_annotations(std::span<const Annotation> truth, const ScoringOptions& opts) {
  InstanceSet out;
  for (const auto& a : truth) {
    out.insert(make_instance(fluent_label(a.term, a.value), arg_names(a.term), a.frame, opts));
  }
  return out;
}

InstanceSet instances_from_csv(std::string_view csv, const ScoringOptions& opts) {
  InstanceSet out;
  auto lines = split(csv, '\n');
  bool header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (!header) {
      if (cols.size() < 3 || cols[0] != "fluent" || cols[1] != "args" || cols[2] != "frame") {
        throw Error(ErrorCode::Parse, std::to_string(i + 1) + ":1: expected header fluent,args,frame", i + 1, 1);
      }
      header = true;
      continue;
    }
    if (cols.size() < 3) {
      throw Error(ErrorCode::Parse, std::to_string(i + 1) + ":1: expected fluent,args,frame", i + 1, 1);
    }
    Frame t = 0;
    const auto& f = cols[2];
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), t);
    if (ec != std::errc() || p != f.data() + f.size()) {
      throw Error(ErrorCode::Parse, std::to_string(i + 1) + ": malformed frame '" + f + "'", i + 1, 1);
    }
    if (cols.size() > 3) {
      throw Error(ErrorCode::Parse,
                  std::to_string(i + 1) + ":1: expected a recognitions CSV (fluent,args,frame)", i + 1, 1);
    }
    out.insert(make_instance(cols[0], cols[1].empty() ? std::vector<std::string>{} : split(cols[1], ':'), t, opts));
  }
  return out;
}

Metrics score(const InstanceSet& recognized, const InstanceSet& truth, std::string_view fluent) {
  auto keep = [&](const Instance& i) { return fluent.empty() || i.fluent == fluent; };
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& r : recognized) {
    if (!keep(r)) continue;
    if (truth.count(r)) ++tp;
    else ++fp;
  }
  for (const auto& t : truth) {
    if (keep(t) && !recognized.count(t)) ++fn;
  }
  return metrics_from_counts(tp, fp, fn);
}

std::vector<std::string> scored_fluents(const InstanceSet& truth) {
  std::set<std::string> names{"meeting", "moving", "fighting", "leaving_object"};
  for (const auto& t : truth) names.insert(t.fluent);
  return {names.begin(), names.end()};
}

namespace {

struct Scored {
  std::string fluent;
  Metrics m;
};

std::vector<Scored> score_all(const InstanceSet& rec, const InstanceSet& truth,
                              std::span<const std::string> fluents) {
  std::vector<Scored> out;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& f : fluents) {
    Metrics m = score(rec, truth, f);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    out.push_back({f, m});
  }
  out.push_back({"all", metrics_from_counts(tp, fp, fn)});
  return out;
}

}  // namespace

std::string metrics_csv(const InstanceSet& recognized, const InstanceSet& truth,
                        std::span<const std::string> fluents) {
  std::string out = "fluent,tp,fp,fn,precision,recall,fmeasure\n";
  for (const auto& s : score_all(recognized, truth, fluents)) {
    out += s.fluent + "," + std::to_string(s.m.tp) + "," + std::to_string(s.m.fp) + "," +
           std::to_string(s.m.fn) + "," + fmt(s.m.precision) + "," + fmt(s.m.recall) + "," +
           fmt(s.m.fmeasure) + "\n";
  }
  return out;
}

std::uint64_t sweep_seed(std::uint64_t master, int run) {
  return derive_seed(master, 0x5eed0000ULL + static_cast<std::uint64_t>(run));
}

std::vector<double> float_range(double lo, double hi, double step) {
  if (!(step > 0)) throw Error(ErrorCode::InvalidArgument, "range step must be positive");
  if (hi < lo) throw Error(ErrorCode::InvalidArgument, "range end below its start");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

SweepResult sweep(const Narrative& clean, std::span<const Annotation> truth, const RuleSet& rules,
                  const SweepConfig& cfg) {
  if (cfg.runs < 1) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one run");
  const InstanceSet gold = instances_from_annotations(truth, cfg.scoring);
  const std::vector<std::string> fluents = cfg.fluents.empty() ? scored_fluents(gold) : cfg.fluents;
  const std::set<std::string> wanted(fluents.begin(), fluents.end());

  struct Task {
    NoiseLevel level;
    double mean;
    int run;
  };
  std::vector<Task> tasks;
  for (auto level : cfg.levels) {
    for (double mean : cfg.means) {
      for (int run = 0; run < cfg.runs; ++run) tasks.push_back({level, mean, run});
    }
  }

  std::vector<std::vector<SweepRun>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  auto work = [&](std::size_t i) {
    const Task& task = tasks[i];
    NoiseConfig nc{task.level, task.mean, cfg.spurious_fraction, sweep_seed(cfg.seed, task.run)};
    Narrative noisy = inject(clean, nc);

    std::vector<RecognitionTrace> traces = recognize(rules, noisy);
    std::erase_if(traces, [&](const RecognitionTrace& t) {
      return !wanted.count(fluent_label(t.term, t.value));
    });
    auto& out = results[i];
    auto emit = [&](const char* engine, double th, const InstanceSet& rec) {
      for (const auto& s : score_all(rec, gold, fluents)) {
        out.push_back(SweepRun{engine, task.level, task.mean, th, s.fluent, task.run, s.m});
      }
    };
    for (double th : cfg.thresholds) {
      emit("prob", th, instances_from_traces(traces, th, cfg.scoring));
      Narrative filtered = filter_for_crisp(noisy, th);
      emit("crisp", th, instances_from_crisp(crisp_recognize(rules, filtered), cfg.scoring));
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult res;
  for (auto& r : results) res.runs.insert(res.runs.end(), r.begin(), r.end());
  auto level_rank = [&](NoiseLevel l) {
    return std::find(cfg.levels.begin(), cfg.levels.end(), l) - cfg.levels.begin();
  };
  auto fluent_rank = [&](const std::string& f) {
    auto it = std::find(fluents.begin(), fluents.end(), f);
    return it - fluents.begin();
  };
  auto key = [&](const SweepRun& r) {
    return std::make_tuple(level_rank(r.level), r.mean, r.threshold, std::string_view(r.engine), fluent_rank(r.fluent), r.run);
  };
  std::stable_sort(res.runs.begin(), res.runs.end(),
                   [&](const SweepRun& a, const SweepRun& b) { return key(a) < key(b); });

  for (std::size_t i = 0; i < res.runs.size();) {
    std::size_t j = i;
    SweepPoint p;
    const SweepRun& first = res.runs[i];
    p.engine = first.engine;
    p.level = first.level;
    p.mean = first.mean;
    p.threshold = first.threshold;
    p.fluent = first.fluent;
    double fsum = 0, psum = 0, rsum = 0;
    auto same = [&](const SweepRun& r) {
      return r.engine == first.engine && r.level == first.level && r.mean == first.mean &&
             r.threshold == first.threshold && r.fluent == first.fluent;
    };
    for (; j < res.runs.size() && same(res.runs[j]); ++j) {
      fsum += res.runs[j].metrics.fmeasure;
      psum += res.runs[j].metrics.precision;
      rsum += res.runs[j].metrics.recall;
    }
    p.runs = static_cast<int>(j - i);
    p.f_mean = fsum / p.runs;
    p.p_mean = psum / p.runs;
    p.r_mean = rsum / p.runs;
    double ss = 0;
    for (std::size_t k = i; k < j; ++k) ss += std::pow(res.runs[k].metrics.fmeasure - p.f_mean, 2);
    p.f_std = p.runs > 1 ? std::sqrt(ss / (p.runs - 1)) : 0.0;
    res.points.push_back(p);
    i = j;
  }
  return res;
}

std::string sweep_runs_csv(const SweepResult& r) {
  std::string out = "engine,level,gamma_mean,threshold,fluent,run,tp,fp,fn,precision,recall,fmeasure\n";
  for (const auto& x : r.runs) {
    out += x.engine + "," + to_string(x.level) + "," + fmt(x.mean) + "," + fmt(x.threshold) + "," + x.fluent +
           "," + std::to_string(x.run) + "," + std::to_string(x.metrics.tp) + "," + std::to_string(x.metrics.fp) +
           "," + std::to_string(x.metrics.fn) + "," + fmt(x.metrics.precision) + "," + fmt(x.metrics.recall) + "," +
           fmt(x.metrics.fmeasure) + "\n";
  }
  return out;
}

std::string sweep_summary_csv(const SweepResult& r) {
  std::string out = "engine,level,gamma_mean,threshold,fluent,runs,f_mean,f_std,precision_mean,recall_mean\n";
  for (const auto& p : r.points) {
    out += p.engine + "," + to_string(p.level) + "," + fmt(p.mean) + "," + fmt(p.threshold) + "," + p.fluent + "," +
           std::to_string(p.runs) + "," + fmt(p.f_mean) + "," + fmt(p.f_std) + "," + fmt(p.p_mean) + "," +
           fmt(p.r_mean) + "\n";
  }
  return out;
}

}  // namespace probec
