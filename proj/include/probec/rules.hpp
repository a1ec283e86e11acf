#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probec/model.hpp"

namespace probec {

struct SourcePos {
  std::size_t line = 0;
  std::size_t col = 0;
};

// Index into Rule::vars.
using VarId = int;

struct PatArg {
  enum class Kind { Var, Sym, Int };
  Kind kind = Kind::Var;
  VarId var = -1;
  Symbol sym;
  std::int64_t num = 0;

  friend bool operator==(const PatArg&, const PatArg&) = default;
};

struct TermPattern {
  Symbol functor;
  std::vector<PatArg> args;

  friend bool operator==(const TermPattern&, const TermPattern&) = default;
};

struct ValuePattern {
  enum class Kind { Bool, Int, Var, Pair };
  Kind kind = Kind::Bool;
  bool flag = true;
  std::int64_t num = 0;
  VarId var = -1;
  PatArg x, y;  // Pair components (Var or Int)

  friend bool operator==(const ValuePattern&, const ValuePattern&) = default;
};

struct Expr {
  enum class Kind { Num, Sym, Var, Abs, Add, Sub };
  Kind kind = Kind::Num;
  double num = 0;
  Symbol sym;
  VarId var = -1;
  std::vector<Expr> kids;

  friend bool operator==(const Expr&, const Expr&) = default;
};

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

struct Literal {
  enum class Kind { Happens, Holds, NotHappens, NotHolds, Compare };
  Kind kind = Kind::Happens;
  TermPattern term;    // Happens/Holds and their negations
  ValuePattern value;  // Holds/NotHolds
  CmpOp op = CmpOp::Lt;
  Expr lhs, rhs;       // Compare
  SourcePos pos;

  bool negated() const { return kind == Kind::NotHappens || kind == Kind::NotHolds; }
  bool temporal() const { return kind != Kind::Compare; }
};

enum class RuleKind { Initiated, Terminated };

struct Rule {
  RuleKind kind = RuleKind::Initiated;
  TermPattern head;
  Value head_value = true;
  std::vector<Literal> body;
  std::vector<std::string> vars;  // variable names, including the time variable
  VarId time_var = -1;
  // Evaluation order of body literals: every literal's inputs are bound by
  // earlier ones (or by the head, for terminatedAt rules).
  std::vector<std::size_t> schedule;
  SourcePos pos;

  std::vector<VarId> head_vars() const;
};

// Built-in fluents computed from coordinate facts.
Symbol close_symbol();
Symbol distance_symbol();
Symbol coord_symbol();

class RuleSet {
 public:
  const std::vector<Rule>& rules() const noexcept { return *rules_; }
  std::span<const Rule* const> initiations(Symbol fluent) const;
  std::span<const Rule* const> terminations(Symbol fluent) const;

  bool is_derived(Symbol f) const;
  bool is_builtin(Symbol f) const;
  bool is_input(Symbol f) const;

  // Derived fluents, dependencies first.
  const std::vector<Symbol>& derived() const noexcept { return order_; }
  const std::vector<Symbol>& builtins() const noexcept { return builtins_; }
  const std::vector<Symbol>& inputs() const noexcept { return inputs_; }

  std::string pretty() const;
  friend bool structurally_equal(const RuleSet& a, const RuleSet& b);

 private:
  friend RuleSet parse_rules(std::string_view text);
  void finalize();

  // Shared so copies keep the rule pointers in init_/term_ valid.
  std::shared_ptr<std::vector<Rule>> rules_ = std::make_shared<std::vector<Rule>>();
  std::vector<Symbol> inputs_;
  std::vector<Symbol> builtins_;
  std::vector<Symbol> order_;
  std::map<Symbol, std::vector<const Rule*>> init_;
  std::map<Symbol, std::vector<const Rule*>> term_;
};

// Parses initiatedAt/terminatedAt rules. Also accepts the directive
// `:- input(name).` declaring an extra input fluent (coord and orientation
// are always inputs).
RuleSet parse_rules(std::string_view text);

RuleSet load_rules(const std::string& path);

// The bundled surveillance activity knowledge base.
RuleSet builtin_activity_rules();
std::string_view builtin_activity_rules_text();

std::string to_string(const Rule& rule);

}  // namespace probec
