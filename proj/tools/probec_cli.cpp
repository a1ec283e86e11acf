#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "probec/probec.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitMismatch = 2;

struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail(std::string message, int code = kExitError) { throw Failure{code, std::move(message)}; }

void check(probec_status s) {
  if (s == PROBEC_OK) return;
  fail(probec_last_error(), s == PROBEC_ERR_MISMATCH ? kExitMismatch : kExitError);
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Rules = Handle<probec_rules, probec_rules_free>;
using Facts = Handle<probec_narrative, probec_narrative_free>;
using Truth = Handle<probec_truth, probec_truth_free>;
using Recognition = Handle<probec_recognition, probec_recognition_free>;

struct Text {
  char* s = nullptr;
  ~Text() { probec_string_free(s); }
  char** out() { return &s; }
  std::string_view view() const { return s ? std::string_view(s) : std::string_view(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, std::string_view data) {
  if (path.empty() || path == "-") {
    std::cout.write(data.data(), static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail("cannot write " + path);
}

void load_rules(const std::string& flag, Rules& rules) {
  std::string path = flag;
  if (path.empty()) {
    if (const char* env = std::getenv("PROBEC_RULES"); env && *env) path = env;
  }
  if (path.empty()) check(probec_rules_builtin(rules.out()));
  else check(probec_rules_load(path.c_str(), rules.out()));
}

double parse_number(const std::string& s, const std::string& what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail("malformed " + what + " '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// "a:b:step" or a comma-separated list.
std::vector<double> parse_means(const std::string& spec) {
  if (spec.find(':') != std::string::npos) {
    auto parts = split(spec, ':');
    if (parts.size() != 3) fail("--means expects lo:hi:step, got '" + spec + "'");
    double lo = parse_number(parts[0], "mean"), hi = parse_number(parts[1], "mean");
    double step = parse_number(parts[2], "step");
    if (!(step > 0) || hi < lo) fail("--means range '" + spec + "' is empty");
    std::vector<double> out;
    auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(spec, ',')) out.push_back(parse_number(p, "mean"));
  if (out.empty()) fail("--means is empty");
  return out;
}

std::vector<double> parse_list(const std::string& spec, const std::string& what) {
  std::vector<double> out;
  for (const auto& p : split(spec, ',')) out.push_back(parse_number(p, what));
  if (out.empty()) fail("--" + what + "s is empty");
  return out;
}

std::vector<probec_noise_level> parse_levels(const std::string& spec) {
  std::vector<probec_noise_level> out;
  for (const auto& p : split(spec, ',')) {
    probec_noise_level l;
    check(probec_noise_level_parse(p.c_str(), &l));
    out.push_back(l);
  }
  if (out.empty()) fail("--levels is empty");
  return out;
}

struct Options {
  std::string facts, rules, out, engine = "prob", level = "smooth", truth, recognized;
  std::string levels = "smooth,intermediate,strong", means = "0.5:8.0:0.5", thresholds = "0.3,0.5,0.7";
  std::string runs_out;
  std::optional<double> threshold;
  double gamma_mean = 1.0, spurious = 0.5, tolerance = 1e-9;
  std::uint64_t seed = 0;
  int runs = 5;
  unsigned threads = 0;
};

void cmd_recognize(const Options& o) {
  Rules rules;
  load_rules(o.rules, rules);
  Facts facts;
  check(probec_narrative_load(o.facts.c_str(), facts.out()));
  probec_engine engine = PROBEC_ENGINE_PROB;
  if (o.engine == "crisp") engine = PROBEC_ENGINE_CRISP;
  else if (o.engine == "scalar") engine = PROBEC_ENGINE_PROB_SCALAR;
  Recognition rec;
  check(probec_recognize(rules.get(), facts.get(), engine, rec.out()));
  Text csv;
  if (engine == PROBEC_ENGINE_CRISP) check(probec_recognition_csv(rec.get(), 0.5, csv.out()));
  else if (o.threshold) check(probec_recognition_csv(rec.get(), *o.threshold, csv.out()));
  else check(probec_recognition_trace_csv(rec.get(), csv.out()));
  write_out(o.out, csv.view());
}

void cmd_noise(const Options& o) {
  Facts facts, noisy;
  check(probec_narrative_load(o.facts.c_str(), facts.out()));
  probec_noise_config cfg{};
  check(probec_noise_level_parse(o.level.c_str(), &cfg.level));
  cfg.gamma_mean = o.gamma_mean;
  cfg.spurious_fraction = o.spurious;
  cfg.seed = o.seed;
  check(probec_inject(facts.get(), &cfg, noisy.out()));
  Text text;
  check(probec_narrative_emit(noisy.get(), text.out()));
  write_out(o.out, text.view());
}

void cmd_filter(const Options& o) {
  Facts facts, kept;
  check(probec_narrative_load(o.facts.c_str(), facts.out()));
  check(probec_filter_crisp(facts.get(), *o.threshold, kept.out()));
  Text text;
  check(probec_narrative_emit(kept.get(), text.out()));
  write_out(o.out, text.view());
}

void cmd_eval(const Options& o) {
  Truth truth;
  check(probec_truth_load(o.truth.c_str(), truth.out()));
  std::string rec = slurp(o.recognized);
  Text csv;
  probec_status s = probec_eval(rec.c_str(), truth.get(), csv.out());
  if (s != PROBEC_OK) fail(o.recognized + ":" + probec_last_error());
  write_out(o.out, csv.view());
}

void cmd_sweep(const Options& o) {
  Rules rules;
  load_rules(o.rules, rules);
  Facts facts;
  check(probec_narrative_load(o.facts.c_str(), facts.out()));
  Truth truth;
  check(probec_truth_load(o.truth.c_str(), truth.out()));
  auto levels = parse_levels(o.levels);
  auto means = parse_means(o.means);
  auto thresholds = parse_list(o.thresholds, "threshold");
  probec_sweep_config cfg{levels.data(), levels.size(), means.data(), means.size(), thresholds.data(),
                          thresholds.size(), o.runs, o.seed, o.spurious, o.threads};
  Text runs, summary;
  check(probec_sweep(rules.get(), facts.get(), truth.get(), &cfg, o.runs_out.empty() ? nullptr : runs.out(),
                     summary.out()));
  if (!o.runs_out.empty()) write_out(o.runs_out, runs.view());
  write_out(o.out, summary.view());
}

void cmd_validate(const Options& o) {
  Rules rules;
  load_rules(o.rules, rules);
  Facts facts;
  check(probec_narrative_load(o.facts.c_str(), facts.out()));
  probec_validation v{};
  probec_status s = probec_validate(rules.get(), facts.get(), o.tolerance, &v);
  if (s != PROBEC_OK && s != PROBEC_ERR_MISMATCH) check(s);
  char line[256];
  std::snprintf(line, sizeof line, "atoms %zu, frames %zu, max |incremental - exact| %.3g", v.atoms, v.frames,
                v.max_error_exact);
  std::string report = line;
  if (v.enumeration_checked) {
    std::snprintf(line, sizeof line, ", max |incremental - enumeration| %.3g", v.max_error_enumeration);
    report += line;
  } else {
    report += ", enumeration skipped (more than 25 uncertain facts)";
  }
  report += s == PROBEC_OK ? "\nOK\n" : "\nMISMATCH\n";
  write_out(o.out, report);
  if (s == PROBEC_ERR_MISMATCH) throw Failure{kExitMismatch, "engines disagree beyond tolerance " + std::to_string(o.tolerance)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic event calculus activity recognition"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", probec_version());
  Options o;

  auto* rec = app.add_subcommand("recognize", "Recognise activities in a fact file");
  rec->add_option("--facts", o.facts, "Fact file")->required();
  rec->add_option("--rules", o.rules, "Rule file (default: $PROBEC_RULES or the bundled rules)");
  rec->add_option("--engine", o.engine, "prob, scalar or crisp")
      ->check(CLI::IsMember({"prob", "scalar", "crisp"}));
  rec->add_option("--threshold", o.threshold, "Print frames above this probability instead of the trace")
      ->check(CLI::Range(0.0, 1.0));
  rec->add_option("--out", o.out, "Output file (default: stdout)");

  auto* noise = app.add_subcommand("noise", "Attach noisy probabilities to a clean fact file");
  noise->add_option("--facts", o.facts, "Clean fact file")->required();
  noise->add_option("--level", o.level, "smooth, intermediate or strong")
      ->check(CLI::IsMember({"smooth", "intermediate", "strong"}));
  noise->add_option("--gamma-mean", o.gamma_mean, "Mean of the Gamma noise distribution")
      ->required()
      ->check(CLI::PositiveNumber);
  noise->add_option("--spurious-fraction", o.spurious, "Share of walking frames given a spurious walker")
      ->check(CLI::Range(0.0, 1.0));
  noise->add_option("--seed", o.seed, "Random seed")->required();
  noise->add_option("--out", o.out, "Output file (default: stdout)");

  auto* filter = app.add_subcommand("filter", "Keep facts above a threshold, made certain");
  filter->add_option("--facts", o.facts, "Fact file")->required();
  filter->add_option("--threshold", o.threshold, "Probability threshold")->required()->check(CLI::Range(0.0, 1.0));
  filter->add_option("--out", o.out, "Output file (default: stdout)");

  auto* eval = app.add_subcommand("eval", "Score recognitions against ground truth");
  eval->add_option("--recognized", o.recognized, "Recognitions CSV (fluent,args,frame)")->required();
  eval->add_option("--truth", o.truth, "Ground-truth holdsAt facts")->required();
  eval->add_option("--out", o.out, "Output file (default: stdout)");

  auto* sweep = app.add_subcommand("sweep", "Compare both engines across noise levels");
  sweep->add_option("--facts", o.facts, "Clean fact file")->required();
  sweep->add_option("--truth", o.truth, "Ground-truth holdsAt facts")->required();
  sweep->add_option("--rules", o.rules, "Rule file (default: $PROBEC_RULES or the bundled rules)");
  sweep->add_option("--levels", o.levels, "Comma-separated noise levels");
  sweep->add_option("--means", o.means, "Gamma means as lo:hi:step or a comma-separated list");
  sweep->add_option("--thresholds", o.thresholds, "Comma-separated thresholds");
  sweep->add_option("--runs", o.runs, "Runs per point")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", o.seed, "Master seed");
  sweep->add_option("--spurious-fraction", o.spurious, "Share of walking frames given a spurious walker")
      ->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  sweep->add_option("--runs-out", o.runs_out, "Also write per-run metrics to this file");
  sweep->add_option("--out", o.out, "Summary output file (default: stdout)");

  auto* validate = app.add_subcommand("validate", "Cross-check the inference modes on a fact file");
  validate->add_option("--facts", o.facts, "Fact file")->required();
  validate->add_option("--rules", o.rules, "Rule file (default: $PROBEC_RULES or the bundled rules)");
  validate->add_option("--tolerance", o.tolerance, "Largest accepted difference")->check(CLI::NonNegativeNumber);
  validate->add_option("--out", o.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*rec) cmd_recognize(o);
    else if (*noise) cmd_noise(o);
    else if (*filter) cmd_filter(o);
    else if (*eval) cmd_eval(o);
    else if (*sweep) cmd_sweep(o);
    else if (*validate) cmd_validate(o);
  } catch (const Failure& f) {
    std::cerr << "probec: " << f.message << "\n";
    return f.code;
  }
  return 0;
}
