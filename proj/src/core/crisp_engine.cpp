#include "probec/crisp.hpp"

#include <cmath>

#include "probec/error.hpp"
#include "probec/spatial.hpp"

namespace probec {

CrispEngine::CrispEngine(const RuleSet& rules, const Narrative& n, Present present)
    : rules_(rules), n_(n), present_(std::move(present)) {
  if (!present_) {
    for (const auto& f : n.facts()) {
      if (f.prob != 0.0 && f.prob != 1.0) {
        throw Error(ErrorCode::NotCrisp,
                    "fact " + to_string(f.body) + " has probability " + std::to_string(f.prob));
      }
    }
    present_ = [&n](FactId id) { return n.fact(id).prob == 1.0; };
  }
  for (FactId id : n.initially()) {
    const auto& body = n.fact(id).body;
    if (rules.is_derived(body.term.functor) && present_(id)) {
      holding_.insert(Atom{body.term, body.value});
      seen_.insert(Atom{body.term, body.value});
    }
  }
}

bool CrispEngine::holds(const Term& term, const Value& value) const {
  return holding_.count(Atom{term, value}) != 0;
}

bool CrispEngine::initiated(const Term& term, const Value& value) {
  compute_frame();
  return initiated_.count(Atom{term, value}) != 0;
}

bool CrispEngine::terminated(const Term& term, const Value& value) {
  compute_frame();
  if (terminated_.count(Atom{term, value})) return true;
  // Atoms not currently holding were not checked by compute_frame.
  for (const Rule* r : rules_.terminations(term.functor)) {
    if (r->head_value != value || r->head.args.size() != term.args.size()) continue;
    Env env(r->vars.size());
    bool ok = true;
    for (std::size_t i = 0; ok && i < term.args.size(); ++i) {
      ok = match_arg(r->head.args[i], term.args[i], env);
    }
    if (ok && prove(*r, 0, env, [](const Env&) { return true; })) return true;
  }
  return false;
}

bool CrispEngine::match_arg(const PatArg& p, const Arg& a, Env& env) const {
  if (p.kind == PatArg::Kind::Sym) {
    return std::holds_alternative<Symbol>(a) && std::get<Symbol>(a) == p.sym;
  }
  if (p.kind == PatArg::Kind::Int) {
    return std::holds_alternative<std::int64_t>(a) && std::get<std::int64_t>(a) == p.num;
  }
  CVal& v = env[p.var];
  CVal got;
  if (std::holds_alternative<Symbol>(a)) {
    got.k = CVal::K::Sym;
    got.sym = std::get<Symbol>(a);
  } else {
    got.k = CVal::K::Num;
    got.num = static_cast<double>(std::get<std::int64_t>(a));
  }
  if (v.k == CVal::K::Free) {
    v = got;
    return true;
  }
  return v.k == got.k && (v.k == CVal::K::Sym ? v.sym == got.sym : v.num == got.num);
}

bool CrispEngine::match_value(const ValuePattern& p, const Value& v, Env& env) const {
  switch (p.kind) {
    case ValuePattern::Kind::Bool:
      return std::holds_alternative<bool>(v) && std::get<bool>(v) == p.flag;
    case ValuePattern::Kind::Int:
      return std::holds_alternative<std::int64_t>(v) && std::get<std::int64_t>(v) == p.num;
    case ValuePattern::Kind::Pair:
      if (!std::holds_alternative<Coord>(v)) return false;
      return match_arg(p.x, Arg(std::get<Coord>(v).x), env) &&
             match_arg(p.y, Arg(std::get<Coord>(v).y), env);
    case ValuePattern::Kind::Var: break;
  }
  if (std::holds_alternative<Coord>(v)) return false;
  CVal got;
  if (std::holds_alternative<bool>(v)) {
    got.k = CVal::K::Sym;
    got.sym = Symbol(std::get<bool>(v) ? "true" : "false");
  } else {
    got.k = CVal::K::Num;
    got.num = static_cast<double>(std::get<std::int64_t>(v));
  }
  CVal& cur = env[p.var];
  if (cur.k == CVal::K::Free) {
    cur = got;
    return true;
  }
  return cur.k == got.k && (cur.k == CVal::K::Sym ? cur.sym == got.sym : cur.num == got.num);
}

bool CrispEngine::instantiate(const TermPattern& p, const Env& env, Term& out) const {
  out.functor = p.functor;
  out.args.clear();
  for (const auto& a : p.args) {
    if (a.kind == PatArg::Kind::Sym) {
      out.args.emplace_back(a.sym);
    } else if (a.kind == PatArg::Kind::Int) {
      out.args.emplace_back(a.num);
    } else {
      const CVal& v = env[a.var];
      if (v.k == CVal::K::Sym) {
        out.args.emplace_back(v.sym);
      } else if (v.k == CVal::K::Num && v.num == std::floor(v.num)) {
        out.args.emplace_back(static_cast<std::int64_t>(v.num));
      } else {
        return false;
      }
    }
  }
  return true;
}

namespace {

struct Num {
  bool ok = false;
  bool sym = false;
  Symbol s;
  double x = 0;
};

}  // namespace

bool CrispEngine::test(const Literal& lit, const Env& env) const {
  auto value = [&](auto& self, const Expr& e) -> Num {
    Num r;
    switch (e.kind) {
      case Expr::Kind::Num: r.ok = true; r.x = e.num; return r;
      case Expr::Kind::Sym: r.ok = r.sym = true; r.s = e.sym; return r;
      case Expr::Kind::Var: {
        const CVal& v = env[e.var];
        if (v.k == CVal::K::Free) return r;
        r.ok = true;
        r.sym = v.k == CVal::K::Sym;
        r.s = v.sym;
        r.x = v.num;
        return r;
      }
      case Expr::Kind::Abs: {
        r = self(self, e.kids[0]);
        if (r.sym) r.ok = false;
        r.x = std::fabs(r.x);
        return r;
      }
      case Expr::Kind::Add:
      case Expr::Kind::Sub: {
        Num a = self(self, e.kids[0]);
        Num b = self(self, e.kids[1]);
        if (!a.ok || !b.ok || a.sym || b.sym) return r;
        r.ok = true;
        r.x = e.kind == Expr::Kind::Add ? a.x + b.x : a.x - b.x;
        return r;
      }
    }
    return r;
  };
  Num a = value(value, lit.lhs);
  Num b = value(value, lit.rhs);
  if (!a.ok || !b.ok) return false;
  if (a.sym || b.sym) {
    bool same = a.sym && b.sym && a.s == b.s;
    if (lit.op == CmpOp::Eq) return same;
    if (lit.op == CmpOp::Ne) return !same;
    return false;
  }
  switch (lit.op) {
    case CmpOp::Lt: return a.x < b.x;
    case CmpOp::Le: return a.x <= b.x;
    case CmpOp::Gt: return a.x > b.x;
    case CmpOp::Ge: return a.x >= b.x;
    case CmpOp::Eq: return a.x == b.x;
    case CmpOp::Ne: return a.x != b.x;
  }
  return false;
}

std::vector<std::pair<Symbol, Coord>> CrispEngine::coords() const {
  std::vector<std::pair<Symbol, Coord>> out;
  for (FactId id : n_.holds(t_, coord_symbol())) {
    if (!present_(id)) continue;
    const auto& body = n_.fact(id).body;
    if (body.term.args.size() != 1 || !std::holds_alternative<Symbol>(body.term.args[0]) ||
        !std::holds_alternative<Coord>(body.value)) {
      continue;
    }
    out.emplace_back(std::get<Symbol>(body.term.args[0]), std::get<Coord>(body.value));
  }
  return out;
}

bool CrispEngine::prove(const Rule& r, std::size_t i, Env& env,
                        const std::function<bool(const Env&)>& on) {
  if (i == r.schedule.size()) return on(env);
  const Literal& lit = r.body[r.schedule[i]];
  const Symbol f = lit.term.functor;
  auto next = [&](Env& e) { return prove(r, i + 1, e, on); };

  if (lit.kind == Literal::Kind::Compare) return test(lit, env) && next(env);

  if (lit.kind == Literal::Kind::Happens || lit.kind == Literal::Kind::NotHappens) {
    bool found = false;
    for (FactId id : n_.happens(t_, f)) {
      if (!present_(id)) continue;
      const Term& term = n_.fact(id).body.term;
      if (term.args.size() != lit.term.args.size()) continue;
      Env e = env;
      bool ok = true;
      for (std::size_t k = 0; ok && k < term.args.size(); ++k) {
        ok = match_arg(lit.term.args[k], term.args[k], e);
      }
      if (!ok) continue;
      if (lit.kind == Literal::Kind::NotHappens) {
        found = true;
        break;
      }
      if (next(e)) return true;
    }
    return lit.kind == Literal::Kind::NotHappens && !found && next(env);
  }

  const bool neg = lit.kind == Literal::Kind::NotHolds;

  if (f == close_symbol() || f == distance_symbol()) {
    auto cs = coords();
    double threshold = 0;
    if (f == close_symbol()) {
      const PatArg& th = lit.term.args[2];
      if (th.kind == PatArg::Kind::Int) {
        threshold = static_cast<double>(th.num);
      } else if (env[th.var].k == CVal::K::Num) {
        threshold = env[th.var].num;
      } else {
        return false;
      }
    }
    // Each coord pair is one proof; close=true/false and distance values
    // come from the pair's separation.
    bool any = false;
    for (const auto& [ea, ca] : cs) {
      for (const auto& [eb, cb] : cs) {
        Env e = env;
        if (!match_arg(lit.term.args[0], Arg(ea), e) || !match_arg(lit.term.args[1], Arg(eb), e)) {
          continue;
        }
        double d = distance(ca, cb);
        bool ok;
        if (f == close_symbol()) {
          ok = match_value(lit.value, Value(d < threshold), e);
        } else if (lit.value.kind == ValuePattern::Kind::Int) {
          ok = d == static_cast<double>(lit.value.num);
        } else if (lit.value.kind == ValuePattern::Kind::Var) {
          CVal& v = e[lit.value.var];
          if (v.k == CVal::K::Free) {
            v.k = CVal::K::Num;
            v.num = d;
            ok = true;
          } else {
            ok = v.k == CVal::K::Num && v.num == d;
          }
        } else {
          ok = false;
        }
        if (!ok) continue;
        if (neg) {
          any = true;
          break;
        }
        if (next(e)) return true;
      }
      if (any) break;
    }
    return neg && !any && next(env);
  }

  if (rules_.is_derived(f)) {
    bool any = false;
    Atom lo{Term{f, {}}, Value(false)};
    for (auto it = holding_.lower_bound(lo); it != holding_.end() && it->term.functor == f; ++it) {
      if (it->term.args.size() != lit.term.args.size()) continue;
      Env e = env;
      bool ok = true;
      for (std::size_t k = 0; ok && k < it->term.args.size(); ++k) {
        ok = match_arg(lit.term.args[k], it->term.args[k], e);
      }
      if (!ok || !match_value(lit.value, it->value, e)) continue;
      if (neg) {
        any = true;
        break;
      }
      if (next(e)) return true;
    }
    return neg && !any && next(env);
  }

  bool any = false;
  for (FactId id : n_.holds(t_, f)) {
    if (!present_(id)) continue;
    const auto& body = n_.fact(id).body;
    if (body.term.args.size() != lit.term.args.size()) continue;
    Env e = env;
    bool ok = true;
    for (std::size_t k = 0; ok && k < body.term.args.size(); ++k) {
      ok = match_arg(lit.term.args[k], body.term.args[k], e);
    }
    if (!ok || !match_value(lit.value, body.value, e)) continue;
    if (neg) {
      any = true;
      break;
    }
    if (next(e)) return true;
  }
  return neg && !any && next(env);
}

void CrispEngine::compute_frame() {
  if (computed_) return;
  initiated_.clear();
  terminated_.clear();
  for (Symbol f : rules_.derived()) {
    for (const Rule* r : rules_.initiations(f)) {
      Env env(r->vars.size());
      prove(*r, 0, env, [&](const Env& e) {
        Term head;
        if (instantiate(r->head, e, head)) initiated_.insert(Atom{head, r->head_value});
        return false;
      });
    }
  }
  for (const Atom& a : holding_) {
    for (const Rule* r : rules_.terminations(a.term.functor)) {
      if (r->head_value != a.value || r->head.args.size() != a.term.args.size()) continue;
      Env env(r->vars.size());
      bool ok = true;
      for (std::size_t i = 0; ok && i < a.term.args.size(); ++i) {
        ok = match_arg(r->head.args[i], a.term.args[i], env);
      }
      if (ok && prove(*r, 0, env, [](const Env&) { return true; })) {
        terminated_.insert(a);
        break;
      }
    }
  }
  computed_ = true;
}

void CrispEngine::advance() {
  compute_frame();
  std::set<Atom> next = initiated_;
  for (const Atom& a : holding_) {
    bool broken = false;
    if (t_ > 0) {
      broken = terminated_.count(a) != 0;
      // Initiating a different value of the same fluent breaks this one.
      Atom lo{a.term, Value(false)};
      for (auto it = initiated_.lower_bound(lo);
           !broken && it != initiated_.end() && it->term == a.term; ++it) {
        broken = it->value != a.value;
      }
    }
    if (!broken) next.insert(a);
  }
  seen_.insert(initiated_.begin(), initiated_.end());
  holding_ = std::move(next);
  ++t_;
  computed_ = false;
}

std::vector<CrispTrace> CrispEngine::run() {
  std::map<Atom, std::vector<Frame>> frames;
  while (t_ <= n_.horizon()) {
    for (const Atom& a : holding_) frames[a].push_back(t_);
    advance();
  }
  std::vector<CrispTrace> out;
  for (const Atom& a : seen_) {
    auto it = frames.find(a);
    out.push_back(CrispTrace{a.term, a.value,
                             it == frames.end() ? std::vector<Frame>{} : it->second});
  }
  return out;
}

std::vector<CrispTrace> crisp_recognize(const RuleSet& rules, const Narrative& n) {
  return CrispEngine(rules, n).run();
}

std::vector<Frame> crisp_holds_stream(const Term& term, const Value& value, const RuleSet& rules,
                                      const Narrative& n) {
  for (auto& tr : crisp_recognize(rules, n)) {
    if (tr.term == term && tr.value == value) return tr.frames;
  }
  return {};
}

}  // namespace probec
