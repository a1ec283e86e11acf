#include "probec/rules.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include "lexer.hpp"
#include "probec/error.hpp"
#include "probec/fact_io.hpp"

namespace probec {

using detail::Tok;
using detail::Token;
using detail::TokenStream;

Symbol close_symbol() {
  static const Symbol s("close");
  return s;
}
Symbol distance_symbol() {
  static const Symbol s("distance");
  return s;
}
Symbol coord_symbol() {
  static const Symbol s("coord");
  return s;
}

std::vector<VarId> Rule::head_vars() const {
  std::vector<VarId> out;
  for (const auto& a : head.args) {
    if (a.kind == PatArg::Kind::Var) out.push_back(a.var);
  }
  return out;
}

namespace {

[[noreturn]] void fail_at(ErrorCode code, SourcePos pos, const std::string& msg) {
  throw Error(code, std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + msg,
              pos.line, pos.col);
}

class RuleParser {
 public:
  explicit RuleParser(std::string_view text) : ts_(detail::tokenize(text)) {}

  void parse(std::vector<Rule>& rules, std::vector<Symbol>& inputs) {
    while (!ts_.at(Tok::End)) {
      if (ts_.at(Tok::Neck)) {
        parse_directive(inputs);
      } else {
        rules.push_back(parse_rule());
      }
    }
  }

 private:
  void parse_directive(std::vector<Symbol>& inputs) {
    ts_.next();
    const Token& name = ts_.expect(Tok::Ident, "directive name");
    if (name.text != "input") ts_.fail(name, "unknown directive '" + name.text + "'");
    ts_.expect(Tok::LParen, "'('");
    inputs.emplace_back(ts_.expect(Tok::Ident, "fluent name").text);
    ts_.expect(Tok::RParen, "')'");
    ts_.expect(Tok::Dot, "'.'");
  }

  Rule parse_rule() {
    rule_ = Rule{};
    const Token& head = ts_.expect(Tok::Ident, "initiatedAt or terminatedAt");
    rule_.pos = {head.line, head.col};
    if (head.text == "initiatedAt") {
      rule_.kind = RuleKind::Initiated;
    } else if (head.text == "terminatedAt") {
      rule_.kind = RuleKind::Terminated;
    } else {
      ts_.fail(head, "rule head must be initiatedAt or terminatedAt, found '" + head.text + "'");
    }
    ts_.expect(Tok::LParen, "'('");
    rule_.head = parse_term_pattern();
    ts_.expect(Tok::Eq, "'='");
    rule_.head_value = parse_head_value();
    ts_.expect(Tok::Comma, "','");
    const Token& tv = ts_.expect(Tok::Variable, "time variable");
    if (tv.text == "_") ts_.fail(tv, "time variable cannot be anonymous");
    rule_.time_var = var(tv.text);
    ts_.expect(Tok::RParen, "')'");
    ts_.expect(Tok::Neck, "':-'");
    do {
      rule_.body.push_back(parse_literal());
    } while (ts_.accept(Tok::Comma));
    ts_.expect(Tok::Dot, "'.' at end of rule");
    return std::move(rule_);
  }

  VarId var(const std::string& name) {
    if (name == "_") {
      rule_.vars.push_back("_G" + std::to_string(rule_.vars.size()));
      return static_cast<VarId>(rule_.vars.size() - 1);
    }
    auto it = std::find(rule_.vars.begin(), rule_.vars.end(), name);
    if (it != rule_.vars.end()) return static_cast<VarId>(it - rule_.vars.begin());
    rule_.vars.push_back(name);
    return static_cast<VarId>(rule_.vars.size() - 1);
  }

  std::int64_t parse_int() {
    bool neg = ts_.accept(Tok::Minus);
    const Token& t = ts_.expect(Tok::Number, "integer");
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size()) ts_.fail(t, "expected integer");
    return neg ? -v : v;
  }

  PatArg parse_pat_arg() {
    PatArg a;
    if (ts_.at(Tok::Variable)) {
      a.kind = PatArg::Kind::Var;
      a.var = var(ts_.next().text);
    } else if (ts_.at(Tok::Ident)) {
      a.kind = PatArg::Kind::Sym;
      a.sym = Symbol(ts_.next().text);
    } else {
      a.kind = PatArg::Kind::Int;
      a.num = parse_int();
    }
    return a;
  }

  TermPattern parse_term_pattern() {
    TermPattern t;
    t.functor = Symbol(ts_.expect(Tok::Ident, "fluent or event name").text);
    if (ts_.accept(Tok::LParen)) {
      do {
        t.args.push_back(parse_pat_arg());
      } while (ts_.accept(Tok::Comma));
      ts_.expect(Tok::RParen, "')'");
    }
    return t;
  }

  Value parse_head_value() {
    if (ts_.at(Tok::Ident)) {
      const Token& t = ts_.next();
      if (t.text == "true") return true;
      if (t.text == "false") return false;
      ts_.fail(t, "expected true, false or integer");
    }
    if (ts_.at(Tok::Variable)) ts_.fail(ts_.peek(), "rule head value must be a constant");
    return parse_int();
  }

  ValuePattern parse_value_pattern() {
    ValuePattern v;
    if (ts_.at(Tok::Ident)) {
      const Token& t = ts_.next();
      if (t.text == "true" || t.text == "false") {
        v.kind = ValuePattern::Kind::Bool;
        v.flag = t.text == "true";
        return v;
      }
      ts_.fail(t, "expected fluent value");
    }
    if (ts_.at(Tok::Variable)) {
      v.kind = ValuePattern::Kind::Var;
      v.var = var(ts_.next().text);
      return v;
    }
    if (ts_.accept(Tok::LParen)) {
      v.kind = ValuePattern::Kind::Pair;
      v.x = parse_pat_arg();
      ts_.expect(Tok::Comma, "','");
      v.y = parse_pat_arg();
      ts_.expect(Tok::RParen, "')'");
      if (v.x.kind == PatArg::Kind::Sym || v.y.kind == PatArg::Kind::Sym) {
        ts_.fail(ts_.peek(), "coordinate components must be integers or variables");
      }
      return v;
    }
    v.kind = ValuePattern::Kind::Int;
    v.num = parse_int();
    return v;
  }

  void expect_time_var() {
    const Token& t = ts_.expect(Tok::Variable, "time variable");
    if (t.text != rule_.vars[rule_.time_var]) {
      ts_.fail(t, "time argument must be the head's time variable " + rule_.vars[rule_.time_var]);
    }
  }

  Literal parse_literal() {
    Literal lit;
    const Token& start = ts_.peek();
    lit.pos = {start.line, start.col};
    bool neg = false;
    if (ts_.at(Tok::Ident) && start.text == "not") {
      ts_.next();
      neg = true;
    }
    const Token& name = ts_.peek();
    bool temporal = name.kind == Tok::Ident && ts_.peek(1).kind == Tok::LParen &&
                    (name.text == "happensAt" || name.text == "holdsAt");
    if (!temporal) {
      if (neg) ts_.fail(name, "'not' must be followed by happensAt or holdsAt");
      lit.kind = Literal::Kind::Compare;
      lit.lhs = parse_expr();
      const Token& op = ts_.next();
      switch (op.kind) {
        case Tok::Lt: lit.op = CmpOp::Lt; break;
        case Tok::Le: lit.op = CmpOp::Le; break;
        case Tok::Gt: lit.op = CmpOp::Gt; break;
        case Tok::Ge: lit.op = CmpOp::Ge; break;
        case Tok::Eq: lit.op = CmpOp::Eq; break;
        case Tok::Neq: lit.op = CmpOp::Ne; break;
        default: ts_.fail(op, "expected comparison operator");
      }
      lit.rhs = parse_expr();
      return lit;
    }
    ts_.next();
    ts_.expect(Tok::LParen, "'('");
    lit.term = parse_term_pattern();
    if (name.text == "happensAt") {
      lit.kind = neg ? Literal::Kind::NotHappens : Literal::Kind::Happens;
    } else {
      lit.kind = neg ? Literal::Kind::NotHolds : Literal::Kind::Holds;
      ts_.expect(Tok::Eq, "'='");
      lit.value = parse_value_pattern();
    }
    ts_.expect(Tok::Comma, "','");
    expect_time_var();
    ts_.expect(Tok::RParen, "')'");
    return lit;
  }

  Expr parse_expr() {
    Expr lhs = parse_unary();
    while (ts_.at(Tok::Plus) || ts_.at(Tok::Minus)) {
      Expr e;
      e.kind = ts_.next().kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
      e.kids.push_back(std::move(lhs));
      e.kids.push_back(parse_unary());
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr parse_unary() {
    Expr e;
    if (ts_.at(Tok::Variable)) {
      e.kind = Expr::Kind::Var;
      e.var = var(ts_.next().text);
      return e;
    }
    if (ts_.at(Tok::Ident)) {
      const Token& t = ts_.next();
      if (t.text == "abs" && ts_.accept(Tok::LParen)) {
        e.kind = Expr::Kind::Abs;
        e.kids.push_back(parse_expr());
        ts_.expect(Tok::RParen, "')'");
        return e;
      }
      e.kind = Expr::Kind::Sym;
      e.sym = Symbol(t.text);
      return e;
    }
    bool neg = ts_.accept(Tok::Minus);
    const Token& t = ts_.expect(Tok::Number, "number, variable or abs(...)");
    double v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) ts_.fail(t, "malformed number");
    e.kind = Expr::Kind::Num;
    e.num = neg ? -v : v;
    return e;
  }

  TokenStream ts_;
  Rule rule_;
};

void collect_expr_vars(const Expr& e, std::vector<VarId>& out) {
  if (e.kind == Expr::Kind::Var) out.push_back(e.var);
  for (const auto& k : e.kids) collect_expr_vars(k, out);
}

void collect_arg_var(const PatArg& a, std::vector<VarId>& out) {
  if (a.kind == PatArg::Kind::Var) out.push_back(a.var);
}

void collect_value_vars(const ValuePattern& v, std::vector<VarId>& out) {
  if (v.kind == ValuePattern::Kind::Var) out.push_back(v.var);
  if (v.kind == ValuePattern::Kind::Pair) {
    collect_arg_var(v.x, out);
    collect_arg_var(v.y, out);
  }
}

// Variables a literal needs bound before it can be evaluated, and the ones
// it binds.
void literal_io(const Literal& lit, std::vector<VarId>& needs, std::vector<VarId>& binds) {
  needs.clear();
  binds.clear();
  switch (lit.kind) {
    case Literal::Kind::Compare:
      collect_expr_vars(lit.lhs, needs);
      collect_expr_vars(lit.rhs, needs);
      return;
    case Literal::Kind::NotHappens:
    case Literal::Kind::NotHolds:
      for (const auto& a : lit.term.args) collect_arg_var(a, needs);
      if (lit.kind == Literal::Kind::NotHolds) collect_value_vars(lit.value, needs);
      return;
    case Literal::Kind::Happens:
      for (const auto& a : lit.term.args) collect_arg_var(a, binds);
      return;
    case Literal::Kind::Holds:
      if (lit.term.functor == close_symbol()) {
        // Entities are enumerated from coord facts; the threshold must be known.
        collect_arg_var(lit.term.args[0], binds);
        collect_arg_var(lit.term.args[1], binds);
        collect_arg_var(lit.term.args[2], needs);
        collect_value_vars(lit.value, binds);
        return;
      }
      for (const auto& a : lit.term.args) collect_arg_var(a, binds);
      collect_value_vars(lit.value, binds);
      return;
  }
}

void check_builtin_shape(const Rule& r, const Literal& lit) {
  if (!lit.temporal() || lit.kind == Literal::Kind::Happens ||
      lit.kind == Literal::Kind::NotHappens) {
    return;
  }
  Symbol f = lit.term.functor;
  if (f == close_symbol()) {
    if (lit.term.args.size() != 3) {
      fail_at(ErrorCode::Parse, lit.pos, "close/3 expects (A, B, Threshold)");
    }
    if (lit.term.args[2].kind == PatArg::Kind::Sym) {
      fail_at(ErrorCode::Parse, lit.pos, "close threshold must be numeric");
    }
    if (lit.value.kind != ValuePattern::Kind::Bool && lit.value.kind != ValuePattern::Kind::Var) {
      fail_at(ErrorCode::Parse, lit.pos, "close value must be true, false or a variable");
    }
  } else if (f == distance_symbol()) {
    if (lit.term.args.size() != 2) fail_at(ErrorCode::Parse, lit.pos, "distance/2 expects (A, B)");
    if (lit.value.kind != ValuePattern::Kind::Var && lit.value.kind != ValuePattern::Kind::Int) {
      fail_at(ErrorCode::Parse, lit.pos, "distance value must be a variable or integer");
    }
  }
  (void)r;
}

void schedule_rule(Rule& r) {
  std::vector<bool> bound(r.vars.size(), false);
  bound[r.time_var] = true;
  if (r.kind == RuleKind::Terminated) {
    for (VarId v : r.head_vars()) bound[v] = true;
  }
  std::vector<bool> done(r.body.size(), false);
  std::vector<VarId> needs, binds;
  r.schedule.clear();
  // Prefer generators over tests: the first pass only takes literals that
  // bind something or have no inputs left; tests run as soon as they can.
  while (r.schedule.size() < r.body.size()) {
    std::size_t pick = r.body.size();
    int best_rank = 99;
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (done[i]) continue;
      literal_io(r.body[i], needs, binds);
      bool ready = std::all_of(needs.begin(), needs.end(), [&](VarId v) { return bound[v]; });
      if (!ready) continue;
      // Tests first (cheap filters), then events, then fluents.
      int rank = 3;
      const auto& lit = r.body[i];
      bool binds_new = std::any_of(binds.begin(), binds.end(), [&](VarId v) { return !bound[v]; });
      if (!binds_new) {
        rank = 0;
      } else if (lit.kind == Literal::Kind::Happens) {
        rank = 1;
      } else if (lit.term.functor == close_symbol() || lit.term.functor == distance_symbol()) {
        rank = 2;
      }
      if (rank < best_rank) {
        best_rank = rank;
        pick = i;
      }
    }
    if (pick == r.body.size()) {
      std::size_t i = 0;
      while (done[i]) ++i;
      literal_io(r.body[i], needs, binds);
      std::string names;
      for (VarId v : needs) {
        if (!bound[v]) names += (names.empty() ? "" : ", ") + r.vars[v];
      }
      fail_at(ErrorCode::UnsafeVariable, r.body[i].pos,
              "variable(s) " + names + " not bound by any positive literal");
    }
    done[pick] = true;
    literal_io(r.body[pick], needs, binds);
    for (VarId v : binds) bound[v] = true;
    r.schedule.push_back(pick);
  }
}

void check_range_restriction(const Rule& r) {
  if (r.kind != RuleKind::Initiated) return;
  std::set<VarId> positive;
  std::vector<VarId> needs, binds;
  for (const auto& lit : r.body) {
    if (lit.kind != Literal::Kind::Happens && lit.kind != Literal::Kind::Holds) continue;
    literal_io(lit, needs, binds);
    positive.insert(binds.begin(), binds.end());
    positive.insert(needs.begin(), needs.end());
  }
  for (VarId v : r.head_vars()) {
    if (!positive.count(v)) {
      fail_at(ErrorCode::UnboundHeadVariable, r.pos,
              "head variable " + r.vars[v] + " does not occur in a positive body literal");
    }
  }
}

const char* op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "=<";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

std::string arg_text(const Rule& r, const PatArg& a) {
  switch (a.kind) {
    case PatArg::Kind::Var: return r.vars[a.var];
    case PatArg::Kind::Sym: return a.sym.name();
    case PatArg::Kind::Int: return std::to_string(a.num);
  }
  return {};
}

std::string term_text(const Rule& r, const TermPattern& t) {
  std::string out = t.functor.name();
  if (!t.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) out += ", ";
      out += arg_text(r, t.args[i]);
    }
    out += ')';
  }
  return out;
}

std::string value_text(const Rule& r, const ValuePattern& v) {
  switch (v.kind) {
    case ValuePattern::Kind::Bool: return v.flag ? "true" : "false";
    case ValuePattern::Kind::Int: return std::to_string(v.num);
    case ValuePattern::Kind::Var: return r.vars[v.var];
    case ValuePattern::Kind::Pair: return "(" + arg_text(r, v.x) + ", " + arg_text(r, v.y) + ")";
  }
  return {};
}

std::string expr_text(const Rule& r, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Num: return format_probability(e.num);
    case Expr::Kind::Sym: return e.sym.name();
    case Expr::Kind::Var: return r.vars[e.var];
    case Expr::Kind::Abs: return "abs(" + expr_text(r, e.kids[0]) + ")";
    case Expr::Kind::Add: return expr_text(r, e.kids[0]) + " + " + expr_text(r, e.kids[1]);
    case Expr::Kind::Sub: return expr_text(r, e.kids[0]) + " - " + expr_text(r, e.kids[1]);
  }
  return {};
}

}  // namespace

std::string to_string(const Rule& r) {
  std::string out = r.kind == RuleKind::Initiated ? "initiatedAt(" : "terminatedAt(";
  out += term_text(r, r.head) + " = " + probec::to_string(r.head_value) + ", " +
         r.vars[r.time_var] + ") :-";
  const std::string& tv = r.vars[r.time_var];
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    const auto& lit = r.body[i];
    out += "\n    ";
    switch (lit.kind) {
      case Literal::Kind::NotHappens: out += "not "; [[fallthrough]];
      case Literal::Kind::Happens:
        out += "happensAt(" + term_text(r, lit.term) + ", " + tv + ")";
        break;
      case Literal::Kind::NotHolds: out += "not "; [[fallthrough]];
      case Literal::Kind::Holds:
        out += "holdsAt(" + term_text(r, lit.term) + " = " + value_text(r, lit.value) + ", " +
               tv + ")";
        break;
      case Literal::Kind::Compare:
        out += expr_text(r, lit.lhs) + " " + op_text(lit.op) + " " + expr_text(r, lit.rhs);
        break;
    }
    out += i + 1 < r.body.size() ? "," : ".";
  }
  return out;
}

std::span<const Rule* const> RuleSet::initiations(Symbol fluent) const {
  auto it = init_.find(fluent);
  if (it == init_.end()) return {};
  return it->second;
}

std::span<const Rule* const> RuleSet::terminations(Symbol fluent) const {
  auto it = term_.find(fluent);
  if (it == term_.end()) return {};
  return it->second;
}

bool RuleSet::is_derived(Symbol f) const { return init_.count(f) != 0; }
bool RuleSet::is_builtin(Symbol f) const {
  return std::find(builtins_.begin(), builtins_.end(), f) != builtins_.end();
}
bool RuleSet::is_input(Symbol f) const {
  return std::find(inputs_.begin(), inputs_.end(), f) != inputs_.end();
}

void RuleSet::finalize() {
  builtins_ = {close_symbol(), distance_symbol()};
  for (Symbol s : {coord_symbol(), Symbol("orientation")}) {
    if (!is_input(s)) inputs_.insert(inputs_.begin(), s);
  }
  init_.clear();
  term_.clear();
  for (auto& r : *rules_) {
    Symbol f = r.head.functor;
    if (is_builtin(f) || is_input(f)) {
      fail_at(ErrorCode::Parse, r.pos, "cannot define rules for built-in or input fluent " + f.name());
    }
    (r.kind == RuleKind::Initiated ? init_ : term_)[f].push_back(&r);
  }
  for (auto& r : *rules_) {
    if (!is_derived(r.head.functor)) {
      fail_at(ErrorCode::UnknownFluent, r.pos,
              "fluent " + r.head.functor.name() + " has terminatedAt rules but no initiatedAt rule");
    }
    for (const auto& lit : r.body) {
      if (lit.kind != Literal::Kind::Holds && lit.kind != Literal::Kind::NotHolds) continue;
      Symbol g = lit.term.functor;
      if (!is_derived(g) && !is_builtin(g) && !is_input(g)) {
        fail_at(ErrorCode::UnknownFluent, lit.pos, "unknown fluent " + g.name());
      }
      check_builtin_shape(r, lit);
    }
    check_range_restriction(r);
    schedule_rule(r);
  }

  // Dependency order over derived fluents; reject cycles.
  std::map<Symbol, std::set<Symbol>> deps;
  for (const auto& r : *rules_) {
    auto& d = deps[r.head.functor];
    for (const auto& lit : r.body) {
      if ((lit.kind == Literal::Kind::Holds || lit.kind == Literal::Kind::NotHolds) &&
          is_derived(lit.term.functor)) {
        d.insert(lit.term.functor);
      }
    }
  }
  order_.clear();
  std::map<Symbol, int> state;  // 0 new, 1 visiting, 2 done
  std::vector<Symbol> stack;
  std::function<void(Symbol)> visit = [&](Symbol f) {
    int& s = state[f];
    if (s == 2) return;
    if (s == 1) {
      std::string cycle;
      auto it = std::find(stack.begin(), stack.end(), f);
      for (; it != stack.end(); ++it) cycle += it->name() + " -> ";
      cycle += f.name();
      const Rule* r = init_[stack.back()].front();
      fail_at(ErrorCode::CyclicFluentDependency, r->pos, "cyclic fluent dependency: " + cycle);
    }
    s = 1;
    stack.push_back(f);
    for (Symbol g : deps[f]) visit(g);
    stack.pop_back();
    state[f] = 2;
    order_.push_back(f);
  };
  for (const auto& [f, _] : init_) visit(f);
}

RuleSet parse_rules(std::string_view text) {
  RuleSet rs;
  RuleParser(text).parse(*rs.rules_, rs.inputs_);
  rs.finalize();
  return rs;
}

RuleSet load_rules(const std::string& path) {
  try {
    return parse_rules(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path + ":" + e.what(), e.line(), e.column());
  }
}

RuleSet builtin_activity_rules() {
  static const RuleSet rules = parse_rules(builtin_activity_rules_text());
  return rules;
}

std::string RuleSet::pretty() const {
  std::string out;
  for (Symbol s : inputs_) {
    if (s == coord_symbol() || s.name() == "orientation") continue;
    out += ":- input(" + s.name() + ").\n";
  }
  for (const auto& r : *rules_) {
    out += to_string(r);
    out += "\n\n";
  }
  return out;
}

bool structurally_equal(const RuleSet& a, const RuleSet& b) {
  if (a.inputs_ != b.inputs_ || a.rules_->size() != b.rules_->size()) return false;
  for (std::size_t i = 0; i < a.rules_->size(); ++i) {
    const Rule& x = (*a.rules_)[i];
    const Rule& y = (*b.rules_)[i];
    if (x.kind != y.kind || !(x.head == y.head) || x.head_value != y.head_value ||
        x.vars != y.vars || x.time_var != y.time_var || x.body.size() != y.body.size()) {
      return false;
    }
    for (std::size_t j = 0; j < x.body.size(); ++j) {
      const Literal& p = x.body[j];
      const Literal& q = y.body[j];
      if (p.kind != q.kind) return false;
      if (p.kind == Literal::Kind::Compare) {
        if (p.op != q.op || !(p.lhs == q.lhs) || !(p.rhs == q.rhs)) return false;
      } else {
        if (!(p.term == q.term)) return false;
        bool holds = p.kind == Literal::Kind::Holds || p.kind == Literal::Kind::NotHolds;
        if (holds && !(p.value == q.value)) return false;
      }
    }
  }
  return true;
}

}  // namespace probec
