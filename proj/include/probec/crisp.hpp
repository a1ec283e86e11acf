#pragma once

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "probec/model.hpp"
#include "probec/rules.hpp"

namespace probec {

// Frames at which holdsAt(term = value, T) is true.
struct CrispTrace {
  Term term;
  Value value = true;
  std::vector<Frame> frames;
};

// Boolean Event Calculus, one frame at a time, with negation as failure.
// A fact takes part when `present(id)` is true. Without a predicate, facts
// with probability 1 are present and facts with probability 0 absent; any
// other probability raises NotCrisp.
class CrispEngine {
 public:
  using Present = std::function<bool(FactId)>;

  CrispEngine(const RuleSet& rules, const Narrative& n, Present present = {});

  Frame frame() const noexcept { return t_; }
  // State at the current frame.
  bool holds(const Term& term, const Value& value) const;
  bool initiated(const Term& term, const Value& value);
  bool terminated(const Term& term, const Value& value);

  // Moves to the next frame.
  void advance();

  // Scans frames 0..horizon. One trace per atom that was ever initiated or
  // given by an initially fact, ordered like the probabilistic traces.
  std::vector<CrispTrace> run();

 private:
  struct Atom {
    Term term;
    Value value;
    friend bool operator<(const Atom& a, const Atom& b) {
      if (a.term.functor != b.term.functor) return a.term.functor < b.term.functor;
      if (a.term.args != b.term.args) return a.term.args < b.term.args;
      return a.value < b.value;
    }
  };
  struct CVal {
    enum class K : std::uint8_t { Free, Sym, Num } k = K::Free;
    Symbol sym;
    double num = 0;
  };
  using Env = std::vector<CVal>;

  void compute_frame();
  bool prove(const Rule& r, std::size_t i, Env& env, const std::function<bool(const Env&)>& on);
  bool match_arg(const PatArg& p, const Arg& a, Env& env) const;
  bool match_value(const ValuePattern& p, const Value& v, Env& env) const;
  bool instantiate(const TermPattern& p, const Env& env, Term& out) const;
  bool test(const Literal& lit, const Env& env) const;
  std::vector<std::pair<Symbol, Coord>> coords() const;

  const RuleSet& rules_;
  const Narrative& n_;
  Present present_;
  Frame t_ = 0;
  std::set<Atom> holding_;        // at t_
  std::set<Atom> initiated_;      // at t_
  std::set<Atom> terminated_;     // at t_, among holding atoms
  bool computed_ = false;
  std::set<Atom> seen_;
};

// Runs the crisp engine over an all-{0,1} narrative.
std::vector<CrispTrace> crisp_recognize(const RuleSet& rules, const Narrative& n);

// Frames where holdsAt(term = value, T) is true.
std::vector<Frame> crisp_holds_stream(const Term& term, const Value& value, const RuleSet& rules,
                                      const Narrative& n);

}  // namespace probec
