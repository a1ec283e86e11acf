#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace probec {

using VarIndex = std::uint32_t;

// Immutable Boolean formula DAG over independent probabilistic variables.
// Constructors simplify constants, so a conjunction containing False is
// False and a disjunction containing True is True.
class Formula {
 public:
  // Ref is a placeholder for a derived atom, resolved by the recognition
  // engine before compilation.
  enum class Kind : std::uint8_t { True, False, Var, Ref, Not, And, Or };

  Formula();  // False

  static Formula top();
  static Formula bottom();
  // A variable with probability `prob`. If prob is exactly 1 or 0 the
  // result is the constant True or False.
  static Formula var(VarIndex v, double prob);
  // Like var() but never folds certain probabilities into constants.
  static Formula raw_var(VarIndex v, double prob);
  static Formula ref(std::uint32_t slot);
  static Formula conj(std::vector<Formula> parts);
  static Formula disj(std::vector<Formula> parts);

  friend Formula operator!(const Formula& f);
  friend Formula operator&&(const Formula& a, const Formula& b);
  friend Formula operator||(const Formula& a, const Formula& b);

  Kind kind() const noexcept;
  bool is_true() const noexcept { return kind() == Kind::True; }
  bool is_false() const noexcept { return kind() == Kind::False; }
  VarIndex var_index() const noexcept;  // Var
  double prob() const noexcept;         // Var
  std::uint32_t slot() const noexcept;  // Ref
  std::span<const Formula> children() const noexcept;  // Not, And, Or

  // Identity of the shared node; equal for copies of one formula.
  const void* id() const noexcept { return node_.get(); }

  // Distinct variables, ascending.
  std::vector<VarIndex> support() const;

  // Evaluates under an assignment indexed by variable. Refs are rejected.
  bool eval(const std::vector<bool>& assignment) const;

 struct Node;  // implementation detail

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

}  // namespace probec
