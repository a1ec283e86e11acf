#pragma once

// Proof-driven grounding of rule bodies at one frame, shared by the
// probabilistic recognition modes.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "probec/formula.hpp"
#include "probec/model.hpp"
#include "probec/rules.hpp"

namespace probec::detail {

using SlotId = std::uint32_t;

// A derived atom f(args)=value that has had at least one initiation proof.
struct Slot {
  Term term;
  Value value;
  Frame created = 0;
};

class SlotTable {
 public:
  SlotId find_or_add(const Term& term, const Value& value, Frame t);
  std::optional<SlotId> find(const Term& term, const Value& value) const;
  const Slot& operator[](SlotId s) const { return slots_[s]; }
  std::size_t size() const noexcept { return slots_.size(); }
  std::span<const SlotId> of_functor(Symbol f) const;
  std::span<const SlotId> of_term(const Term& t) const;

 private:
  std::vector<Slot> slots_;
  std::unordered_map<Term, std::vector<SlotId>, TermHash> by_term_;
  std::unordered_map<const void*, std::vector<SlotId>> by_functor_;
};

// Initiation and break condition of one slot at one frame. `brk` is only
// filled for slots that were alive.
struct Conditions {
  SlotId slot;
  Formula init;
  Formula brk;
};

class Grounder {
 public:
  Grounder(const RuleSet& rules, const Narrative& n, SlotTable& slots)
      : rules_(rules), n_(n), slots_(slots) {}

  // Grounds every rule at frame t. Derived holdsAt literals become
  // Formula::ref(slot) for slots where `alive` is true; other slots cannot
  // hold at t. Slots are created for atoms that gain an initiation proof.
  // Input facts appear as Formula::var(fact id, prob). Sorted by slot.
  std::vector<Conditions> ground(Frame t, const std::function<bool(SlotId)>& alive);

  // Slots for derived atoms named by initially facts, with the fact ids.
  std::vector<std::pair<SlotId, FactId>> seed_initially();

 private:
  struct BVal {
    enum class K : std::uint8_t { Unbound, Sym, Num } k = K::Unbound;
    Symbol sym;
    double num = 0;
  };
  using Binding = std::vector<BVal>;
  using Emit = std::function<void(const Binding&, const Formula&)>;

  void solve(const Rule& r, std::size_t step, Binding b, std::vector<Formula>& factors,
             const Emit& emit);
  bool unify_arg(const PatArg& p, const Arg& a, Binding& b) const;
  bool unify_value(const ValuePattern& p, const Value& v, Binding& b) const;
  std::optional<Term> ground_term(const TermPattern& p, const Binding& b) const;
  std::optional<BVal> eval(const Expr& e, const Binding& b) const;
  bool compare(const Literal& lit, const Binding& b) const;
  Formula close_formula(const std::vector<FactId>& ca, const std::vector<FactId>& cb,
                        double threshold, bool value) const;
  const std::vector<FactId>& coords_of(Symbol e);
  const std::vector<Symbol>& coord_entities();
  Formula var_of(FactId id) const;

  const RuleSet& rules_;
  const Narrative& n_;
  SlotTable& slots_;
  Frame t_ = 0;
  const std::function<bool(SlotId)>* alive_ = nullptr;
  std::unordered_map<const void*, std::vector<FactId>> coords_;
  std::vector<Symbol> coord_entities_;
  bool coords_ready_ = false;
};

}  // namespace probec::detail
