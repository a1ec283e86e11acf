#include "probec/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "grounder.hpp"
#include "probec/error.hpp"

namespace probec {

using detail::Conditions;
using detail::Grounder;
using detail::SlotId;
using detail::SlotTable;

namespace {

std::vector<RecognitionTrace> collect_traces(const SlotTable& slots,
                                             std::vector<std::vector<double>>& probs) {
  std::vector<RecognitionTrace> out;
  out.reserve(slots.size());
  for (SlotId s = 0; s < slots.size(); ++s) {
    out.push_back(RecognitionTrace{slots[s].term, slots[s].value, std::move(probs[s])});
  }
  std::sort(out.begin(), out.end(), [](const RecognitionTrace& a, const RecognitionTrace& b) {
    if (a.term.functor != b.term.functor) return a.term.functor < b.term.functor;
    if (a.term.args != b.term.args) return a.term.args < b.term.args;
    return a.value < b.value;
  });
  return out;
}

// Declares every Var leaf of `f` that `mgr` does not know yet.
void declare_leaves(BddManager& mgr, const Formula& f) {
  std::vector<const Formula*> stack{&f};
  std::unordered_map<const void*, bool> seen;
  while (!stack.empty()) {
    const Formula* g = stack.back();
    stack.pop_back();
    if (!seen.emplace(g->id(), true).second) continue;
    if (g->kind() == Formula::Kind::Var && !mgr.declared(g->var_index())) {
      mgr.declare(g->var_index(), g->var_index(), g->prob());
    }
    for (const auto& c : g->children()) stack.push_back(&c);
  }
}

// Replaces Ref leaves using `sub`, sharing rebuilt nodes.
Formula substitute(const Formula& f, const std::vector<Formula>& sub,
                   std::unordered_map<const void*, Formula>& memo) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False:
    case Formula::Kind::Var: return f;
    case Formula::Kind::Ref: return sub[f.slot()];
    default: break;
  }
  auto it = memo.find(f.id());
  if (it != memo.end()) return it->second;
  Formula out;
  if (f.kind() == Formula::Kind::Not) {
    out = !substitute(f.children()[0], sub, memo);
  } else {
    std::vector<Formula> kids;
    for (const auto& c : f.children()) kids.push_back(substitute(c, sub, memo));
    out = f.kind() == Formula::Kind::And ? Formula::conj(std::move(kids))
                                         : Formula::disj(std::move(kids));
  }
  memo.emplace(f.id(), out);
  return out;
}

std::vector<RecognitionTrace> run_bdd_state(const RuleSet& rules, const Narrative& n,
                                           const RecognizeOptions& opts) {
  SlotTable slots;
  Grounder g(rules, n, slots);
  BddManager mgr;
  const auto count = static_cast<std::uint32_t>(n.size());
  for (FactId id = 0; id < count; ++id) mgr.declare(id, count - 1 - id, n.fact(id).prob);

  const std::size_t frames = static_cast<std::size_t>(n.horizon()) + 1;
  std::vector<BddManager::Node> state;
  std::vector<std::vector<double>> probs;
  auto grow = [&] {
    while (state.size() < slots.size()) {
      state.push_back(BddManager::kFalse);
      probs.emplace_back(frames, 0.0);
    }
  };
  for (auto [s, id] : g.seed_initially()) {
    grow();
    state[s] = mgr.disj(state[s], mgr.build(Formula::var(id, n.fact(id).prob)));
  }

  std::size_t gc_at = opts.gc_threshold;
  auto alive = [&](SlotId s) { return s < state.size() && state[s] != BddManager::kFalse; };
  auto resolve = [&](std::uint32_t s) { return state[s]; };
  std::vector<std::pair<SlotId, BddManager::Node>> next;
  for (Frame t = 0; t <= n.horizon(); ++t) {
    grow();
    for (SlotId s = 0; s < state.size(); ++s) probs[s][t] = mgr.probability(state[s]);
    auto conds = g.ground(t, alive);
    grow();
    next.clear();
    for (const Conditions& c : conds) {
      BddManager::Node held = state[c.slot];
      if (t > 0 && held != BddManager::kFalse) {
        held = mgr.conj(held, mgr.negate(mgr.build(c.brk, resolve)));
      }
      next.emplace_back(c.slot, mgr.disj(mgr.build(c.init, resolve), held));
    }
    for (auto [s, node] : next) state[s] = node;
    if (mgr.node_count() > gc_at) {
      mgr.collect(state);
      gc_at = std::max(opts.gc_threshold, 2 * mgr.node_count());
    }
  }
  return collect_traces(slots, probs);
}

std::vector<RecognitionTrace> run_scalar(const RuleSet& rules, const Narrative& n) {
  SlotTable slots;
  Grounder g(rules, n, slots);
  const auto aux_base = static_cast<std::uint32_t>(n.size());
  const std::size_t frames = static_cast<std::size_t>(n.horizon()) + 1;
  std::vector<double> p;
  std::vector<std::vector<double>> probs;
  auto grow = [&] {
    while (p.size() < slots.size()) {
      p.push_back(0.0);
      probs.emplace_back(frames, 0.0);
    }
  };
  for (auto [s, id] : g.seed_initially()) {
    grow();
    p[s] = 1.0 - (1.0 - p[s]) * (1.0 - n.fact(id).prob);
  }
  auto alive = [&](SlotId s) { return s < p.size() && p[s] > 0.0; };
  std::vector<std::pair<SlotId, double>> next;
  for (Frame t = 0; t <= n.horizon(); ++t) {
    grow();
    for (SlotId s = 0; s < p.size(); ++s) probs[s][t] = p[s];
    auto conds = g.ground(t, alive);
    grow();
    BddManager mgr;
    auto resolve = [&](std::uint32_t s) {
      if (!mgr.declared(aux_base + s)) mgr.declare(aux_base + s, aux_base + s, p[s]);
      return mgr.var(aux_base + s);
    };
    next.clear();
    for (const Conditions& c : conds) {
      declare_leaves(mgr, c.init);
      declare_leaves(mgr, c.brk);
      BddManager::Node a = mgr.build(c.init, resolve);
      BddManager::Node brk = t > 0 ? mgr.build(c.brk, resolve) : BddManager::kFalse;
      double pa = mgr.probability(a);
      double keep = mgr.probability(mgr.conj(mgr.negate(a), mgr.negate(brk)));
      next.emplace_back(c.slot, pa + keep * p[c.slot]);
    }
    for (auto [s, v] : next) p[s] = v;
  }
  return collect_traces(slots, probs);
}

// Full per-(atom, frame) formulas over input facts only.
struct ExactFormulas {
  SlotTable slots;
  std::vector<std::vector<Formula>> holds;  // [slot][frame]
};

ExactFormulas build_exact(const RuleSet& rules, const Narrative& n) {
  ExactFormulas ex;
  Grounder g(rules, n, ex.slots);
  const std::size_t frames = static_cast<std::size_t>(n.horizon()) + 1;
  std::vector<std::vector<Formula>> init(0), brk(0);
  std::vector<Formula> initially;
  auto grow = [&] {
    while (ex.holds.size() < ex.slots.size()) {
      ex.holds.emplace_back(frames, Formula::bottom());
      init.emplace_back(frames, Formula::bottom());
      brk.emplace_back(frames, Formula::bottom());
      initially.push_back(Formula::bottom());
    }
  };
  for (auto [s, id] : g.seed_initially()) {
    grow();
    initially[s] = initially[s] || Formula::var(id, n.fact(id).prob);
  }

  std::vector<Formula> current;
  for (Frame t = 0; t <= n.horizon(); ++t) {
    grow();
    const auto ut = static_cast<std::size_t>(t);
    // holdsAt at t: initiated at some Ts < t and not broken in between, or
    // initially and not broken in (0, t).
    for (SlotId s = 0; s < ex.slots.size(); ++s) {
      std::vector<Formula> proofs;
      Formula unbroken = Formula::top();
      for (std::size_t ts = ut; ts-- > 0;) {
        proofs.push_back(init[s][ts] && unbroken);
        if (ts > 0) unbroken = unbroken && !brk[s][ts];
      }
      proofs.push_back(initially[s] && unbroken);
      ex.holds[s][ut] = Formula::disj(std::move(proofs));
    }
    current.resize(ex.slots.size());
    for (SlotId s = 0; s < ex.slots.size(); ++s) current[s] = ex.holds[s][ut];
    auto alive = [&](SlotId s) { return s < current.size() && !current[s].is_false(); };
    auto conds = g.ground(t, alive);
    grow();
    std::unordered_map<const void*, Formula> memo;
    for (const Conditions& c : conds) {
      init[c.slot][ut] = substitute(c.init, current, memo);
      brk[c.slot][ut] = substitute(c.brk, current, memo);
    }
  }
  return ex;
}

}  // namespace

std::vector<RecognitionTrace> recognize(const RuleSet& rules, const Narrative& n,
                                        const RecognizeOptions& opts) {
  if (opts.model == StateModel::Scalar) return run_scalar(rules, n);
  return run_bdd_state(rules, n, opts);
}

std::vector<RecognitionTrace> recognize_exact_bdd(const RuleSet& rules, const Narrative& n) {
  ExactFormulas ex = build_exact(rules, n);
  std::vector<std::vector<double>> probs(ex.slots.size());
  for (SlotId s = 0; s < ex.slots.size(); ++s) {
    for (const Formula& f : ex.holds[s]) probs[s].push_back(probability(compile(f)));
  }
  return collect_traces(ex.slots, probs);
}

double recognize_exact_bdd(const RuleSet& rules, const Narrative& n, const Term& term,
                           const Value& value, Frame t, std::size_t max_vars) {
  if (t < 0 || t > n.horizon()) return 0.0;
  ExactFormulas ex = build_exact(rules, n);
  auto s = ex.slots.find(term, value);
  if (!s) return 0.0;
  const Formula& f = ex.holds[*s][static_cast<std::size_t>(t)];
  auto support = f.support();
  if (support.size() > max_vars) {
    throw Error(ErrorCode::TooManyVars, "query depends on " + std::to_string(support.size()) +
                                            " probabilistic facts (limit " +
                                            std::to_string(max_vars) + ")");
  }
  return probability(compile(f, support));
}

std::vector<RecognitionTrace> recognize_enumerated(const RuleSet& rules, const Narrative& n) {
  ExactFormulas ex = build_exact(rules, n);
  std::vector<Formula> all;
  for (const auto& row : ex.holds) all.insert(all.end(), row.begin(), row.end());
  std::vector<double> flat = world_enumeration(all);
  std::vector<std::vector<double>> probs(ex.slots.size());
  std::size_t k = 0;
  for (SlotId s = 0; s < ex.slots.size(); ++s) {
    probs[s].assign(flat.begin() + static_cast<std::ptrdiff_t>(k),
                    flat.begin() + static_cast<std::ptrdiff_t>(k + ex.holds[s].size()));
    k += ex.holds[s].size();
  }
  return collect_traces(ex.slots, probs);
}

double negate1(const Term& event, Frame t, const Narrative& n) {
  for (FactId id : n.happens(t, event.functor)) {
    if (n.fact(id).body.term == event) return 1.0 - n.fact(id).prob;
  }
  return 1.0;
}

double negate2(double goal_probability) { return 1.0 - goal_probability; }

double step(double prev, const TimepointEvents& events, BddManager& mgr) {
  declare_leaves(mgr, events.init);
  declare_leaves(mgr, events.brk);
  BddManager::Node a = mgr.build(events.init);
  BddManager::Node c = mgr.build(events.brk);
  double pa = mgr.probability(a);
  double keep = mgr.probability(mgr.conj(mgr.negate(a), mgr.negate(c)));
  return pa + keep * prev;
}

std::vector<Frame> filter_recognitions(const RecognitionTrace& trace, double threshold) {
  std::vector<Frame> out;
  for (std::size_t t = 0; t < trace.probs.size(); ++t) {
    if (trace.probs[t] > threshold) out.push_back(static_cast<Frame>(t));
  }
  return out;
}

std::string fluent_label(const Term& term, const Value& value) {
  if (const auto* b = std::get_if<bool>(&value); b && *b) return term.functor.name();
  return term.functor.name() + "=" + to_string(value);
}

std::string args_label(const Term& term) {
  std::string out;
  for (std::size_t i = 0; i < term.args.size(); ++i) {
    if (i) out += ':';
    out += to_string(term.args[i]);
  }
  return out;
}

std::string trace_csv(std::span<const RecognitionTrace> traces) {
  std::string out = "fluent,args,frame,probability\n";
  char buf[64];
  for (const auto& tr : traces) {
    std::string prefix = fluent_label(tr.term, tr.value) + "," + args_label(tr.term) + ",";
    for (std::size_t t = 0; t < tr.probs.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%zu,%.10g\n", t, tr.probs[t]);
      out += prefix;
      out += buf;
    }
  }
  return out;
}

std::string recognitions_csv(std::span<const RecognitionTrace> traces, double threshold) {
  std::string out = "fluent,args,frame\n";
  for (const auto& tr : traces) {
    std::string prefix = fluent_label(tr.term, tr.value) + "," + args_label(tr.term) + ",";
    for (Frame t : filter_recognitions(tr, threshold)) {
      out += prefix + std::to_string(t) + "\n";
    }
  }
  return out;
}

}  // namespace probec
