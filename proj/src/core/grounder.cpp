#include "grounder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "probec/error.hpp"
#include "probec/spatial.hpp"

namespace probec::detail {

SlotId SlotTable::find_or_add(const Term& term, const Value& value, Frame t) {
  auto& ids = by_term_[term];
  for (SlotId s : ids) {
    if (slots_[s].value == value) return s;
  }
  SlotId s = static_cast<SlotId>(slots_.size());
  slots_.push_back(Slot{term, value, t});
  ids.push_back(s);
  by_functor_[term.functor.key()].push_back(s);
  return s;
}

std::optional<SlotId> SlotTable::find(const Term& term, const Value& value) const {
  auto it = by_term_.find(term);
  if (it == by_term_.end()) return std::nullopt;
  for (SlotId s : it->second) {
    if (slots_[s].value == value) return s;
  }
  return std::nullopt;
}

std::span<const SlotId> SlotTable::of_functor(Symbol f) const {
  auto it = by_functor_.find(f.key());
  if (it == by_functor_.end()) return {};
  return it->second;
}

std::span<const SlotId> SlotTable::of_term(const Term& t) const {
  auto it = by_term_.find(t);
  if (it == by_term_.end()) return {};
  return it->second;
}

Formula Grounder::var_of(FactId id) const { return Formula::var(id, n_.fact(id).prob); }

bool Grounder::unify_arg(const PatArg& p, const Arg& a, Binding& b) const {
  switch (p.kind) {
    case PatArg::Kind::Sym: {
      const auto* s = std::get_if<Symbol>(&a);
      return s && *s == p.sym;
    }
    case PatArg::Kind::Int: {
      const auto* i = std::get_if<std::int64_t>(&a);
      return i && *i == p.num;
    }
    case PatArg::Kind::Var: break;
  }
  BVal& v = b[p.var];
  if (const auto* s = std::get_if<Symbol>(&a)) {
    if (v.k == BVal::K::Unbound) {
      v.k = BVal::K::Sym;
      v.sym = *s;
      return true;
    }
    return v.k == BVal::K::Sym && v.sym == *s;
  }
  double x = static_cast<double>(std::get<std::int64_t>(a));
  if (v.k == BVal::K::Unbound) {
    v.k = BVal::K::Num;
    v.num = x;
    return true;
  }
  return v.k == BVal::K::Num && v.num == x;
}

bool Grounder::unify_value(const ValuePattern& p, const Value& v, Binding& b) const {
  switch (p.kind) {
    case ValuePattern::Kind::Bool: {
      const auto* f = std::get_if<bool>(&v);
      return f && *f == p.flag;
    }
    case ValuePattern::Kind::Int: {
      const auto* i = std::get_if<std::int64_t>(&v);
      return i && *i == p.num;
    }
    case ValuePattern::Kind::Pair: {
      const auto* c = std::get_if<Coord>(&v);
      return c && unify_arg(p.x, Arg(c->x), b) && unify_arg(p.y, Arg(c->y), b);
    }
    case ValuePattern::Kind::Var: break;
  }
  BVal& slot = b[p.var];
  BVal val;
  if (const auto* f = std::get_if<bool>(&v)) {
    val.k = BVal::K::Sym;
    val.sym = Symbol(*f ? "true" : "false");
  } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
    val.k = BVal::K::Num;
    val.num = static_cast<double>(*i);
  } else {
    return false;  // a coordinate pair does not fit a single variable
  }
  if (slot.k == BVal::K::Unbound) {
    slot = val;
    return true;
  }
  if (slot.k != val.k) return false;
  return slot.k == BVal::K::Sym ? slot.sym == val.sym : slot.num == val.num;
}

std::optional<Term> Grounder::ground_term(const TermPattern& p, const Binding& b) const {
  Term t;
  t.functor = p.functor;
  t.args.reserve(p.args.size());
  for (const auto& a : p.args) {
    switch (a.kind) {
      case PatArg::Kind::Sym: t.args.emplace_back(a.sym); break;
      case PatArg::Kind::Int: t.args.emplace_back(a.num); break;
      case PatArg::Kind::Var: {
        const BVal& v = b[a.var];
        if (v.k == BVal::K::Sym) {
          t.args.emplace_back(v.sym);
        } else if (v.k == BVal::K::Num && std::floor(v.num) == v.num) {
          t.args.emplace_back(static_cast<std::int64_t>(v.num));
        } else {
          return std::nullopt;
        }
        break;
      }
    }
  }
  return t;
}

std::optional<Grounder::BVal> Grounder::eval(const Expr& e, const Binding& b) const {
  BVal out;
  switch (e.kind) {
    case Expr::Kind::Num:
      out.k = BVal::K::Num;
      out.num = e.num;
      return out;
    case Expr::Kind::Sym:
      out.k = BVal::K::Sym;
      out.sym = e.sym;
      return out;
    case Expr::Kind::Var:
      if (b[e.var].k == BVal::K::Unbound) return std::nullopt;
      return b[e.var];
    case Expr::Kind::Abs: {
      auto x = eval(e.kids[0], b);
      if (!x || x->k != BVal::K::Num) return std::nullopt;
      x->num = std::fabs(x->num);
      return x;
    }
    case Expr::Kind::Add:
    case Expr::Kind::Sub: {
      auto x = eval(e.kids[0], b);
      auto y = eval(e.kids[1], b);
      if (!x || !y || x->k != BVal::K::Num || y->k != BVal::K::Num) return std::nullopt;
      out.k = BVal::K::Num;
      out.num = e.kind == Expr::Kind::Add ? x->num + y->num : x->num - y->num;
      return out;
    }
  }
  return std::nullopt;
}

bool Grounder::compare(const Literal& lit, const Binding& b) const {
  auto x = eval(lit.lhs, b);
  auto y = eval(lit.rhs, b);
  if (!x || !y) return false;
  if (x->k != y->k) return lit.op == CmpOp::Ne;
  if (x->k == BVal::K::Sym) {
    if (lit.op == CmpOp::Eq) return x->sym == y->sym;
    if (lit.op == CmpOp::Ne) return x->sym != y->sym;
    return false;
  }
  switch (lit.op) {
    case CmpOp::Lt: return x->num < y->num;
    case CmpOp::Le: return x->num <= y->num;
    case CmpOp::Gt: return x->num > y->num;
    case CmpOp::Ge: return x->num >= y->num;
    case CmpOp::Eq: return x->num == y->num;
    case CmpOp::Ne: return x->num != y->num;
  }
  return false;
}

const std::vector<Symbol>& Grounder::coord_entities() {
  if (!coords_ready_) {
    coords_.clear();
    coord_entities_.clear();
    for (FactId id : n_.holds(t_, coord_symbol())) {
      const auto& body = n_.fact(id).body;
      if (body.term.args.size() != 1 || !std::holds_alternative<Coord>(body.value)) continue;
      const auto* s = std::get_if<Symbol>(&body.term.args[0]);
      if (!s) continue;
      auto& v = coords_[s->key()];
      if (v.empty()) coord_entities_.push_back(*s);
      v.push_back(id);
    }
    coords_ready_ = true;
  }
  return coord_entities_;
}

const std::vector<FactId>& Grounder::coords_of(Symbol e) {
  static const std::vector<FactId> kNone;
  coord_entities();
  auto it = coords_.find(e.key());
  return it == coords_.end() ? kNone : it->second;
}

Formula Grounder::close_formula(const std::vector<FactId>& ca, const std::vector<FactId>& cb,
                                double threshold, bool value) const {
  std::vector<Formula> pairs;
  for (FactId i : ca) {
    for (FactId j : cb) {
      double d = distance(std::get<Coord>(n_.fact(i).body.value),
                          std::get<Coord>(n_.fact(j).body.value));
      if ((d < threshold) == value) pairs.push_back(var_of(i) && var_of(j));
    }
  }
  return Formula::disj(std::move(pairs));
}

void Grounder::solve(const Rule& r, std::size_t step, Binding b, std::vector<Formula>& factors,
                     const Emit& emit) {
  if (step == r.schedule.size()) {
    emit(b, Formula::conj(factors));
    return;
  }
  const Literal& lit = r.body[r.schedule[step]];
  auto push = [&](const Formula& f, const Binding& nb) {
    if (f.is_false()) return;
    factors.push_back(f);
    solve(r, step + 1, nb, factors, emit);
    factors.pop_back();
  };
  const Symbol f = lit.term.functor;

  switch (lit.kind) {
    case Literal::Kind::Compare:
      if (compare(lit, b)) solve(r, step + 1, std::move(b), factors, emit);
      return;

    case Literal::Kind::Happens:
      for (FactId id : n_.happens(t_, f)) {
        const auto& term = n_.fact(id).body.term;
        if (term.args.size() != lit.term.args.size()) continue;
        Binding nb = b;
        bool ok = true;
        for (std::size_t i = 0; ok && i < term.args.size(); ++i) {
          ok = unify_arg(lit.term.args[i], term.args[i], nb);
        }
        if (ok) push(var_of(id), nb);
      }
      return;

    case Literal::Kind::NotHappens: {
      auto g = ground_term(lit.term, b);
      if (!g) return;
      std::vector<Formula> absent;
      for (FactId id : n_.happens(t_, f)) {
        if (n_.fact(id).body.term == *g) absent.push_back(!var_of(id));
      }
      push(Formula::conj(std::move(absent)), b);
      return;
    }

    case Literal::Kind::Holds:
    case Literal::Kind::NotHolds:
      break;
  }

  const bool negated = lit.kind == Literal::Kind::NotHolds;

  if (f == close_symbol()) {
    BVal th;
    const PatArg& ta = lit.term.args[2];
    if (ta.kind == PatArg::Kind::Int) {
      th.k = BVal::K::Num;
      th.num = static_cast<double>(ta.num);
    } else {
      th = b[ta.var];
    }
    if (th.k != BVal::K::Num) return;
    std::vector<Symbol> as, bs;
    auto candidates = [&](const PatArg& p, std::vector<Symbol>& out) {
      if (p.kind == PatArg::Kind::Sym) {
        out.push_back(p.sym);
      } else if (p.kind == PatArg::Kind::Var && b[p.var].k == BVal::K::Sym) {
        out.push_back(b[p.var].sym);
      } else if (p.kind == PatArg::Kind::Var && b[p.var].k == BVal::K::Unbound) {
        out = coord_entities();
      }
    };
    candidates(lit.term.args[0], as);
    candidates(lit.term.args[1], bs);
    for (Symbol ea : as) {
      for (Symbol eb : bs) {
        Binding nb = b;
        if (!unify_arg(lit.term.args[0], Arg(ea), nb)) continue;
        if (!unify_arg(lit.term.args[1], Arg(eb), nb)) continue;
        const auto& ca = coords_of(ea);
        const auto& cb = coords_of(eb);
        if (negated) {
          bool want = lit.value.kind == ValuePattern::Kind::Bool ? lit.value.flag
                                                                 : nb[lit.value.var].sym ==
                                                                       Symbol("true");
          push(!close_formula(ca, cb, th.num, want), nb);
          continue;
        }
        for (bool value : {true, false}) {
          Binding vb = nb;
          if (!unify_value(lit.value, Value(value), vb)) continue;
          push(close_formula(ca, cb, th.num, value), vb);
        }
      }
    }
    return;
  }

  if (f == distance_symbol()) {
    std::vector<Symbol> as, bs;
    auto candidates = [&](const PatArg& p, std::vector<Symbol>& out) {
      if (p.kind == PatArg::Kind::Sym) {
        out.push_back(p.sym);
      } else if (p.kind == PatArg::Kind::Var && b[p.var].k == BVal::K::Sym) {
        out.push_back(b[p.var].sym);
      } else if (p.kind == PatArg::Kind::Var && b[p.var].k == BVal::K::Unbound) {
        out = coord_entities();
      }
    };
    candidates(lit.term.args[0], as);
    candidates(lit.term.args[1], bs);
    for (Symbol ea : as) {
      for (Symbol eb : bs) {
        Binding nb = b;
        if (!unify_arg(lit.term.args[0], Arg(ea), nb)) continue;
        if (!unify_arg(lit.term.args[1], Arg(eb), nb)) continue;
        std::vector<Formula> matches;
        for (FactId i : coords_of(ea)) {
          for (FactId j : coords_of(eb)) {
            double d = distance(std::get<Coord>(n_.fact(i).body.value),
                                std::get<Coord>(n_.fact(j).body.value));
            Binding vb = nb;
            BVal& dv = lit.value.kind == ValuePattern::Kind::Var ? vb[lit.value.var] : vb[0];
            bool ok;
            if (lit.value.kind == ValuePattern::Kind::Int) {
              ok = d == static_cast<double>(lit.value.num);
            } else if (dv.k == BVal::K::Unbound) {
              dv.k = BVal::K::Num;
              dv.num = d;
              ok = true;
            } else {
              ok = dv.k == BVal::K::Num && dv.num == d;
            }
            if (!ok) continue;
            if (negated) {
              matches.push_back(var_of(i) && var_of(j));
            } else {
              push(var_of(i) && var_of(j), vb);
            }
          }
        }
        if (negated) push(!Formula::disj(std::move(matches)), nb);
      }
    }
    return;
  }

  if (rules_.is_derived(f)) {
    if (negated) {
      auto g = ground_term(lit.term, b);
      if (!g) return;
      std::vector<Formula> absent;
      for (SlotId s : slots_.of_term(*g)) {
        if (!(*alive_)(s)) continue;
        Binding nb = b;
        if (unify_value(lit.value, slots_[s].value, nb)) absent.push_back(!Formula::ref(s));
      }
      push(Formula::conj(std::move(absent)), b);
      return;
    }
    for (SlotId s : slots_.of_functor(f)) {
      if (!(*alive_)(s)) continue;
      const Slot& slot = slots_[s];
      if (slot.term.args.size() != lit.term.args.size()) continue;
      Binding nb = b;
      bool ok = true;
      for (std::size_t i = 0; ok && i < slot.term.args.size(); ++i) {
        ok = unify_arg(lit.term.args[i], slot.term.args[i], nb);
      }
      if (ok && unify_value(lit.value, slot.value, nb)) push(Formula::ref(s), nb);
    }
    return;
  }

  // Input fluent observed through holdsAt facts.
  if (negated) {
    auto g = ground_term(lit.term, b);
    if (!g) return;
    std::vector<Formula> absent;
    for (FactId id : n_.holds(t_, f)) {
      const auto& body = n_.fact(id).body;
      if (!(body.term == *g)) continue;
      Binding nb = b;
      if (unify_value(lit.value, body.value, nb)) absent.push_back(!var_of(id));
    }
    push(Formula::conj(std::move(absent)), b);
    return;
  }
  for (FactId id : n_.holds(t_, f)) {
    const auto& body = n_.fact(id).body;
    if (body.term.args.size() != lit.term.args.size()) continue;
    Binding nb = b;
    bool ok = true;
    for (std::size_t i = 0; ok && i < body.term.args.size(); ++i) {
      ok = unify_arg(lit.term.args[i], body.term.args[i], nb);
    }
    if (ok && unify_value(lit.value, body.value, nb)) push(var_of(id), nb);
  }
}

std::vector<Conditions> Grounder::ground(Frame t, const std::function<bool(SlotId)>& alive) {
  t_ = t;
  alive_ = &alive;
  coords_ready_ = false;

  std::map<SlotId, std::vector<Formula>> init_parts;
  std::map<SlotId, std::vector<Formula>> brk_parts;
  std::vector<Formula> factors;

  for (Symbol f : rules_.derived()) {
    std::vector<SlotId> fresh_terms;
    for (const Rule* r : rules_.initiations(f)) {
      Binding b(r->vars.size());
      solve(*r, 0, std::move(b), factors, [&](const Binding& nb, const Formula& proof) {
        auto term = ground_term(r->head, nb);
        if (!term) return;
        SlotId s = slots_.find_or_add(*term, r->head_value, t);
        init_parts[s].push_back(proof);
      });
    }
    for (SlotId s : slots_.of_functor(f)) {
      if (!alive(s)) continue;
      const Slot& slot = slots_[s];
      auto& parts = brk_parts[s];
      for (const Rule* r : rules_.terminations(f)) {
        if (r->head_value != slot.value) continue;
        if (r->head.args.size() != slot.term.args.size()) continue;
        Binding b(r->vars.size());
        bool ok = true;
        for (std::size_t i = 0; ok && i < slot.term.args.size(); ++i) {
          ok = unify_arg(r->head.args[i], slot.term.args[i], b);
        }
        if (!ok) continue;
        solve(*r, 0, std::move(b), factors,
              [&](const Binding&, const Formula& proof) { parts.push_back(proof); });
      }
      // Initiating another value of the same fluent breaks this one.
      for (SlotId other : slots_.of_term(slot.term)) {
        if (other == s) continue;
        auto it = init_parts.find(other);
        if (it != init_parts.end()) parts.insert(parts.end(), it->second.begin(), it->second.end());
      }
    }
  }

  std::vector<Conditions> out;
  auto it_i = init_parts.begin();
  auto it_b = brk_parts.begin();
  while (it_i != init_parts.end() || it_b != brk_parts.end()) {
    SlotId s;
    if (it_b == brk_parts.end() || (it_i != init_parts.end() && it_i->first <= it_b->first)) {
      s = it_i->first;
    } else {
      s = it_b->first;
    }
    Conditions c{s, Formula::bottom(), Formula::bottom()};
    if (it_i != init_parts.end() && it_i->first == s) {
      c.init = Formula::disj(std::move(it_i->second));
      ++it_i;
    }
    if (it_b != brk_parts.end() && it_b->first == s) {
      c.brk = Formula::disj(std::move(it_b->second));
      ++it_b;
    }
    if (!c.init.is_false() || !c.brk.is_false()) out.push_back(std::move(c));
  }
  alive_ = nullptr;
  return out;
}

std::vector<std::pair<SlotId, FactId>> Grounder::seed_initially() {
  std::vector<std::pair<SlotId, FactId>> out;
  for (FactId id : n_.initially()) {
    const auto& body = n_.fact(id).body;
    if (!rules_.is_derived(body.term.functor)) continue;
    out.emplace_back(slots_.find_or_add(body.term, body.value, 0), id);
  }
  return out;
}

}  // namespace probec::detail
