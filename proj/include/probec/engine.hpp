#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "probec/bdd.hpp"
#include "probec/formula.hpp"
#include "probec/model.hpp"
#include "probec/rules.hpp"

namespace probec {

// Probability of holdsAt(term = value, t) for every frame t in [0, horizon].
struct RecognitionTrace {
  Term term;
  Value value = true;
  std::vector<double> probs;
};

// How the probability that an atom holds is carried from frame to frame.
enum class StateModel {
  // One BDD per atom over all facts so far, newest frame nearest the root.
  // Exact, including correlations between an atom and the derived fluents
  // in its rule bodies.
  Bdd,
  // A single number per atom. Derived fluents referenced in rule bodies
  // enter each frame's formulas as independent variables carrying their
  // current probability. Exact only when those fluents share no facts with
  // the atom's own history.
  Scalar,
};

struct RecognizeOptions {
  StateModel model = StateModel::Bdd;
  // Garbage-collect the BDD store once it grows past this many nodes.
  std::size_t gc_threshold = std::size_t{1} << 21;
};

// Forward scan over frames 0..horizon. One trace per derived atom that had
// at least one initiation proof, ordered by fluent name, arguments, value.
std::vector<RecognitionTrace> recognize(const RuleSet& rules, const Narrative& n,
                                        const RecognizeOptions& opts = {});

// Whole-query evaluation: for each (atom, frame) builds the disjunction over
// initiation frames Ts < T of A_Ts AND NOT C_u for all Ts < u < T (plus the
// initially case), with derived atoms expanded to their own full formulas,
// and compiles it into a fresh BDD in ascending fact order.
std::vector<RecognitionTrace> recognize_exact_bdd(const RuleSet& rules, const Narrative& n);

// Single query. TooManyVars if its formula mentions more than `max_vars`
// probabilistic facts.
double recognize_exact_bdd(const RuleSet& rules, const Narrative& n, const Term& term,
                           const Value& value, Frame t, std::size_t max_vars = 25);

// The same formulas as recognize_exact_bdd, evaluated by summing possible
// worlds. TooManyVars when the narrative's formulas mention more than 25
// probabilistic facts.
std::vector<RecognitionTrace> recognize_enumerated(const RuleSet& rules, const Narrative& n);

// 1 if no fact matches the ground event at t, otherwise 1 - p.
double negate1(const Term& event, Frame t, const Narrative& n);
// Complement of a goal probability (0 encodes "not inferable").
double negate2(double goal_probability);

// Initiation and break conditions of one atom at one frame.
struct TimepointEvents {
  Formula init;
  Formula brk;
};

// P_{t+1} = P(A) + P(not A and not C) * P_t, with A and C compiled into
// `mgr`. Variables not yet declared in `mgr` are declared with their own
// index as rank.
double step(double prev, const TimepointEvents& events, BddManager& mgr);

// Frames whose probability is strictly above `threshold`.
std::vector<Frame> filter_recognitions(const RecognitionTrace& trace, double threshold);

// "meeting" for value true, "f=v" otherwise.
std::string fluent_label(const Term& term, const Value& value);
// Arguments joined with ':'.
std::string args_label(const Term& term);

// CSV `fluent,args,frame,probability`, one row per atom and frame.
std::string trace_csv(std::span<const RecognitionTrace> traces);
// CSV `fluent,args,frame` for frames above `threshold`.
std::string recognitions_csv(std::span<const RecognitionTrace> traces, double threshold);

}  // namespace probec
