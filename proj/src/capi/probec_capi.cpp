#include "probec/probec.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "probec/crisp.hpp"
#include "probec/engine.hpp"
#include "probec/error.hpp"
#include "probec/eval.hpp"
#include "probec/fact_io.hpp"
#include "probec/noise.hpp"
#include "probec/rules.hpp"

struct probec_rules {
  probec::RuleSet rules;
};

struct probec_narrative {
  probec::Narrative n;
};

struct probec_truth {
  std::vector<probec::Annotation> annotations;
};

struct probec_recognition {
  std::vector<probec::RecognitionTrace> traces;
  std::vector<std::string> fluents;
  std::vector<std::string> args;
};

namespace {

struct LastError {
  std::string message;
  std::size_t line = 0;
  std::size_t column = 0;
};

thread_local LastError last_error;

probec_status fail(probec_status s, std::string msg, std::size_t line = 0, std::size_t col = 0) {
  last_error = {std::move(msg), line, col};
  return s;
}

template <class F>
probec_status guard(F&& f) {
  try {
    return f();
  } catch (const probec::Error& e) {
    return fail(static_cast<probec_status>(e.code()), e.what(), e.line(), e.column());
  } catch (const std::bad_alloc&) {
    return fail(PROBEC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PROBEC_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

probec_status null_arg(const char* what) {
  return fail(PROBEC_ERR_INVALID_ARGUMENT, std::string("null ") + what);
}

probec::NoiseLevel level_of(probec_noise_level l) {
  switch (l) {
    case PROBEC_NOISE_SMOOTH: return probec::NoiseLevel::Smooth;
    case PROBEC_NOISE_INTERMEDIATE: return probec::NoiseLevel::Intermediate;
    case PROBEC_NOISE_STRONG: return probec::NoiseLevel::Strong;
  }
  throw probec::Error(probec::ErrorCode::InvalidArgument, "unknown noise level");
}

probec_recognition* wrap(std::vector<probec::RecognitionTrace> traces) {
  auto* r = new probec_recognition{std::move(traces), {}, {}};
  for (const auto& t : r->traces) {
    r->fluents.push_back(probec::fluent_label(t.term, t.value));
    r->args.push_back(probec::args_label(t.term));
  }
  return r;
}

std::vector<probec::RecognitionTrace> crisp_traces(const probec::RuleSet& rules, const probec::Narrative& n) {
  std::vector<probec::RecognitionTrace> out;
  for (auto& c : probec::crisp_recognize(rules, n)) {
    std::vector<double> p(static_cast<std::size_t>(n.horizon()) + 1, 0.0);
    for (auto t : c.frames) p[static_cast<std::size_t>(t)] = 1.0;
    out.push_back({std::move(c.term), c.value, std::move(p)});
  }
  return out;
}

double max_diff(const std::vector<probec::RecognitionTrace>& a, const std::vector<probec::RecognitionTrace>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].term == b[i].term) || a[i].value != b[i].value || a[i].probs.size() != b[i].probs.size()) {
      return INFINITY;
    }
    for (std::size_t t = 0; t < a[i].probs.size(); ++t) {
      double d = std::fabs(a[i].probs[t] - b[i].probs[t]);
      if (!(d <= worst)) worst = std::isnan(d) ? INFINITY : d;
    }
  }
  return worst;
}

}  // namespace

extern "C" {

const char* probec_version(void) { return "1.0.0"; }

const char* probec_status_name(probec_status status) {
  switch (status) {
    case PROBEC_OK: return "Ok";
    case PROBEC_ERR_MISMATCH: return "Mismatch";
    case PROBEC_ERR_INTERNAL: return "InternalError";
    default: break;
  }
  if (status >= PROBEC_ERR_PARSE && status <= PROBEC_ERR_IO) {
    return probec::to_string(static_cast<probec::ErrorCode>(status));
  }
  return "Unknown";
}

const char* probec_last_error(void) { return last_error.message.c_str(); }
size_t probec_last_error_line(void) { return last_error.line; }
size_t probec_last_error_column(void) { return last_error.column; }

void probec_string_free(char* s) { std::free(s); }

probec_status probec_rules_load(const char* path, probec_rules** out) {
  if (!path || !out) return null_arg("argument");
  return guard([&] {
    *out = new probec_rules{probec::load_rules(path)};
    return PROBEC_OK;
  });
}

probec_status probec_rules_parse(const char* text, probec_rules** out) {
  if (!text || !out) return null_arg("argument");
  return guard([&] {
    *out = new probec_rules{probec::parse_rules(text)};
    return PROBEC_OK;
  });
}

probec_status probec_rules_builtin(probec_rules** out) {
  if (!out) return null_arg("output");
  return guard([&] {
    *out = new probec_rules{probec::builtin_activity_rules()};
    return PROBEC_OK;
  });
}

probec_status probec_rules_pretty(const probec_rules* rules, char** out) {
  if (!rules || !out) return null_arg("argument");
  return guard([&] {
    *out = dup(rules->rules.pretty());
    return PROBEC_OK;
  });
}

void probec_rules_free(probec_rules* rules) { delete rules; }

probec_status probec_narrative_load(const char* path, probec_narrative** out) {
  if (!path || !out) return null_arg("argument");
  return guard([&] {
    *out = new probec_narrative{probec::load_narrative(path)};
    return PROBEC_OK;
  });
}

probec_status probec_narrative_parse(const char* text, probec_narrative** out) {
  if (!text || !out) return null_arg("argument");
  return guard([&] {
    *out = new probec_narrative{probec::Narrative::index(probec::parse_facts(text))};
    return PROBEC_OK;
  });
}

probec_status probec_narrative_emit(const probec_narrative* n, char** out) {
  if (!n || !out) return null_arg("argument");
  return guard([&] {
    *out = dup(probec::emit_facts(n->n.facts()));
    return PROBEC_OK;
  });
}

size_t probec_narrative_size(const probec_narrative* n) { return n ? n->n.size() : 0; }
int64_t probec_narrative_horizon(const probec_narrative* n) { return n ? n->n.horizon() : 0; }

double probec_narrative_probability(const probec_narrative* n, size_t i) {
  if (!n || i >= n->n.size()) return NAN;
  return n->n.facts()[i].prob;
}

int probec_narrative_all_certain(const probec_narrative* n) { return n && n->n.all_certain() ? 1 : 0; }

void probec_narrative_free(probec_narrative* n) { delete n; }

probec_status probec_noise_level_parse(const char* name, probec_noise_level* out) {
  if (!name || !out) return null_arg("argument");
  return guard([&] {
    *out = static_cast<probec_noise_level>(probec::parse_noise_level(name));
    return PROBEC_OK;
  });
}

probec_status probec_inject(const probec_narrative* clean, const probec_noise_config* cfg, probec_narrative** out) {
  if (!clean || !cfg || !out) return null_arg("argument");
  return guard([&] {
    probec::NoiseConfig nc{level_of(cfg->level), cfg->gamma_mean, cfg->spurious_fraction, cfg->seed};
    *out = new probec_narrative{probec::inject(clean->n, nc)};
    return PROBEC_OK;
  });
}

probec_status probec_filter_crisp(const probec_narrative* n, double threshold, probec_narrative** out) {
  if (!n || !out) return null_arg("argument");
  return guard([&] {
    *out = new probec_narrative{probec::filter_for_crisp(n->n, threshold)};
    return PROBEC_OK;
  });
}

probec_status probec_recognize(const probec_rules* rules, const probec_narrative* n, probec_engine engine,
                               probec_recognition** out) {
  if (!rules || !n || !out) return null_arg("argument");
  return guard([&] {
    switch (engine) {
      case PROBEC_ENGINE_PROB:
        *out = wrap(probec::recognize(rules->rules, n->n));
        return PROBEC_OK;
      case PROBEC_ENGINE_PROB_SCALAR:
        *out = wrap(probec::recognize(rules->rules, n->n, {probec::StateModel::Scalar}));
        return PROBEC_OK;
      case PROBEC_ENGINE_CRISP:
        for (const auto& f : n->n.facts()) {
          if (f.prob != 1.0) {
            return fail(PROBEC_ERR_NOT_CRISP, "crisp recognition needs certain facts; found " +
                                                  probec::format_probability(f.prob) +
                                                  "::" + probec::to_string(f.body) +
                                                  " (filter the narrative first)");
          }
        }
        *out = wrap(crisp_traces(rules->rules, n->n));
        return PROBEC_OK;
    }
    return fail(PROBEC_ERR_INVALID_ARGUMENT, "unknown engine");
  });
}

size_t probec_recognition_count(const probec_recognition* r) { return r ? r->traces.size() : 0; }

const char* probec_recognition_fluent(const probec_recognition* r, size_t i) {
  return r && i < r->fluents.size() ? r->fluents[i].c_str() : nullptr;
}

const char* probec_recognition_args(const probec_recognition* r, size_t i) {
  return r && i < r->args.size() ? r->args[i].c_str() : nullptr;
}

const double* probec_recognition_probs(const probec_recognition* r, size_t i, size_t* len) {
  if (!r || i >= r->traces.size()) {
    if (len) *len = 0;
    return nullptr;
  }
  if (len) *len = r->traces[i].probs.size();
  return r->traces[i].probs.data();
}

probec_status probec_recognition_trace_csv(const probec_recognition* r, char** out) {
  if (!r || !out) return null_arg("argument");
  return guard([&] {
    *out = dup(probec::trace_csv(r->traces));
    return PROBEC_OK;
  });
}

probec_status probec_recognition_csv(const probec_recognition* r, double threshold, char** out) {
  if (!r || !out) return null_arg("argument");
  return guard([&] {
    *out = dup(probec::recognitions_csv(r->traces, threshold));
    return PROBEC_OK;
  });
}

void probec_recognition_free(probec_recognition* r) { delete r; }

probec_status probec_validate(const probec_rules* rules, const probec_narrative* n, double tolerance,
                              probec_validation* out) {
  if (!rules || !n || !out) return null_arg("argument");
  return guard([&] {
    auto inc = probec::recognize(rules->rules, n->n);
    auto exact = probec::recognize_exact_bdd(rules->rules, n->n);
    *out = probec_validation{max_diff(inc, exact), 0.0, 0, inc.size(),
                             static_cast<std::size_t>(n->n.horizon()) + 1};
    try {
      out->max_error_enumeration = max_diff(inc, probec::recognize_enumerated(rules->rules, n->n));
      out->enumeration_checked = 1;
    } catch (const probec::Error& e) {
      if (e.code() != probec::ErrorCode::TooManyVars) throw;
    }
    if (!(out->max_error_exact <= tolerance) || !(out->max_error_enumeration <= tolerance)) {
      return fail(PROBEC_ERR_MISMATCH, "engines disagree beyond tolerance");
    }
    return PROBEC_OK;
  });
}

void probec_metrics_from_counts(size_t tp, size_t fp, size_t fn, probec_metrics* out) {
  if (!out) return;
  auto m = probec::metrics_from_counts(tp, fp, fn);
  *out = probec_metrics{m.tp, m.fp, m.fn, m.precision, m.recall, m.fmeasure};
}

probec_status probec_truth_load(const char* path, probec_truth** out) {
  if (!path || !out) return null_arg("argument");
  return guard([&] {
    try {
      *out = new probec_truth{probec::parse_annotations(probec::read_file(path))};
    } catch (const probec::Error& e) {
      if (e.code() == probec::ErrorCode::Io) throw;
      throw probec::Error(e.code(), std::string(path) + ":" + e.what(), e.line(), e.column());
    }
    return PROBEC_OK;
  });
}

probec_status probec_truth_parse(const char* text, probec_truth** out) {
  if (!text || !out) return null_arg("argument");
  return guard([&] {
    *out = new probec_truth{probec::parse_annotations(text)};
    return PROBEC_OK;
  });
}

void probec_truth_free(probec_truth* t) { delete t; }

probec_status probec_eval(const char* recognitions_csv, const probec_truth* truth, char** out) {
  if (!recognitions_csv || !truth || !out) return null_arg("argument");
  return guard([&] {
    auto rec = probec::instances_from_csv(recognitions_csv);
    auto gold = probec::instances_from_annotations(truth->annotations);
    auto fluents = probec::scored_fluents(gold);
    *out = dup(probec::metrics_csv(rec, gold, fluents));
    return PROBEC_OK;
  });
}

probec_status probec_sweep(const probec_rules* rules, const probec_narrative* clean, const probec_truth* truth,
                           const probec_sweep_config* cfg, char** runs_csv, char** summary_csv) {
  if (!rules || !clean || !truth || !cfg) return null_arg("argument");
  if ((cfg->level_count && !cfg->levels) || (cfg->mean_count && !cfg->means) ||
      (cfg->threshold_count && !cfg->thresholds)) {
    return null_arg("sweep array");
  }
  return guard([&] {
    probec::SweepConfig sc;
    sc.levels.clear();
    for (std::size_t i = 0; i < cfg->level_count; ++i) sc.levels.push_back(level_of(cfg->levels[i]));
    sc.means.assign(cfg->means, cfg->means + cfg->mean_count);
    sc.thresholds.assign(cfg->thresholds, cfg->thresholds + cfg->threshold_count);
    sc.runs = cfg->runs;
    sc.seed = cfg->seed;
    sc.spurious_fraction = cfg->spurious_fraction;
    sc.threads = cfg->threads;
    auto res = probec::sweep(clean->n, truth->annotations, rules->rules, sc);
    char* a = runs_csv ? dup(probec::sweep_runs_csv(res)) : nullptr;
    char* b = nullptr;
    try {
      b = summary_csv ? dup(probec::sweep_summary_csv(res)) : nullptr;
    } catch (...) {
      std::free(a);
      throw;
    }
    if (runs_csv) *runs_csv = a;
    if (summary_csv) *summary_csv = b;
    return PROBEC_OK;
  });
}

}  // extern "C"
