#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "probec/formula.hpp"

namespace probec {

// Hash-consed store of reduced ordered BDD nodes. Each variable is declared
// with a rank; nodes with a smaller rank sit closer to the root.
class BddManager {
 public:
  using Node = std::uint32_t;
  static constexpr Node kFalse = 0;
  static constexpr Node kTrue = 1;

  BddManager();

  void declare(VarIndex v, std::uint32_t rank, double prob);
  bool declared(VarIndex v) const noexcept;

  Node var(VarIndex v);
  Node negate(Node a);
  Node conj(Node a, Node b);
  Node disj(Node a, Node b);

  // Translates `f`. Ref leaves go through `resolve`; a Var that was never
  // declared raises VarNotInOrder.
  Node build(const Formula& f, const std::function<Node(std::uint32_t)>& resolve = {});

  // P(n) = p * P(high) + (1 - p) * P(low), memoised per node.
  double probability(Node n);

  bool is_terminal(Node n) const noexcept { return n <= kTrue; }
  VarIndex node_var(Node n) const { return nodes_[n].var; }
  std::uint32_t node_rank(Node n) const { return nodes_[n].rank; }
  Node low(Node n) const { return nodes_[n].lo; }
  Node high(Node n) const { return nodes_[n].hi; }
  double var_prob(VarIndex v) const { return prob_[v]; }

  // Internal nodes reachable from `root`.
  std::size_t size(Node root) const;
  // Internal nodes currently allocated.
  std::size_t node_count() const noexcept { return nodes_.size() - 2; }

  // Frees nodes unreachable from `roots` and renumbers the rest; `roots` is
  // rewritten in place.
  void collect(std::span<Node> roots);

  std::string to_dot(Node root) const;

 private:
  struct Rec {
    VarIndex var;
    std::uint32_t rank;
    Node lo, hi;
    Node next;  // unique-table chain
  };
  struct CacheEntry {
    Node a = 0, b = 0;
    std::uint32_t op = ~0u;
    Node r = 0;
  };
  enum Op : std::uint32_t { kAnd = 0, kOr = 1, kNot = 2 };

  Node make(VarIndex v, std::uint32_t rank, Node lo, Node hi);
  Node apply(Op op, Node a, Node b);
  Node not_rec(Node a);
  std::size_t bucket(VarIndex v, Node lo, Node hi) const noexcept;
  void rehash(std::size_t buckets);
  CacheEntry& cache_slot(Op op, Node a, Node b);
  void maybe_grow_cache();

  std::vector<Rec> nodes_;
  std::vector<Node> table_;
  std::vector<CacheEntry> cache_;
  std::vector<double> pmemo_;
  std::vector<std::uint32_t> rank_;
  std::vector<double> prob_;
  std::vector<bool> declared_;
};

// A compiled formula together with the manager that owns its nodes.
class Bdd {
 public:
  Bdd(std::shared_ptr<BddManager> mgr, BddManager::Node root)
      : mgr_(std::move(mgr)), root_(root) {}

  BddManager::Node root() const noexcept { return root_; }
  BddManager& manager() const noexcept { return *mgr_; }
  std::size_t size() const { return mgr_->size(root_); }

  // Same variables, ranks and shape, possibly across managers.
  friend bool operator==(const Bdd& a, const Bdd& b);

 private:
  std::shared_ptr<BddManager> mgr_;
  BddManager::Node root_;
};

// Compiles with `order` listing variables from the root down. Every
// variable of `f` must occur in `order` (VarNotInOrder otherwise); Ref
// leaves are rejected with InvalidArgument.
Bdd compile(const Formula& f, std::span<const VarIndex> order);
// Ascending variable index from the root down.
Bdd compile(const Formula& f);

double probability(const Bdd& b);

// Success probability by summing the weights of all satisfying assignments
// of the formula's variables. TooManyVars above 25 variables.
double world_enumeration(const Formula& f);
// The same for several formulas at once, sharing one enumeration over the
// union of their variables.
std::vector<double> world_enumeration(std::span<const Formula> fs);

std::string to_dot(const Bdd& b);

}  // namespace probec
