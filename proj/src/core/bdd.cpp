#include "probec/bdd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "probec/error.hpp"

namespace probec {

namespace {

constexpr std::uint32_t kTerminalRank = std::numeric_limits<std::uint32_t>::max();
constexpr BddManager::Node kNil = std::numeric_limits<BddManager::Node>::max();
constexpr std::size_t kMaxCache = std::size_t{1} << 22;

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

}  // namespace

BddManager::BddManager() {
  nodes_.push_back(Rec{0, kTerminalRank, kFalse, kFalse, kNil});
  nodes_.push_back(Rec{0, kTerminalRank, kTrue, kTrue, kNil});
  pmemo_ = {0.0, 1.0};
  table_.assign(1024, kNil);
  cache_.resize(1024);
}

void BddManager::declare(VarIndex v, std::uint32_t rank, double prob) {
  if (v >= rank_.size()) {
    rank_.resize(v + 1, 0);
    prob_.resize(v + 1, 0.0);
    declared_.resize(v + 1, false);
  }
  if (declared_[v]) {
    if (rank_[v] != rank) throw Error(ErrorCode::InvalidArgument, "variable declared twice");
    prob_[v] = prob;
    return;
  }
  if (rank == kTerminalRank) throw Error(ErrorCode::InvalidArgument, "rank out of range");
  rank_[v] = rank;
  prob_[v] = prob;
  declared_[v] = true;
}

bool BddManager::declared(VarIndex v) const noexcept {
  return v < declared_.size() && declared_[v];
}

std::size_t BddManager::bucket(VarIndex v, Node lo, Node hi) const noexcept {
  std::uint64_t h = mix((std::uint64_t{v} << 32) ^ lo ^ (std::uint64_t{hi} << 16) ^
                        (std::uint64_t{hi} * 0x9e3779b97f4a7c15ULL));
  return h & (table_.size() - 1);
}

void BddManager::rehash(std::size_t buckets) {
  table_.assign(buckets, kNil);
  for (Node n = 2; n < nodes_.size(); ++n) {
    auto& r = nodes_[n];
    std::size_t b = bucket(r.var, r.lo, r.hi);
    r.next = table_[b];
    table_[b] = n;
  }
}

BddManager::Node BddManager::make(VarIndex v, std::uint32_t rank, Node lo, Node hi) {
  if (lo == hi) return lo;
  std::size_t b = bucket(v, lo, hi);
  for (Node n = table_[b]; n != kNil; n = nodes_[n].next) {
    const auto& r = nodes_[n];
    if (r.var == v && r.lo == lo && r.hi == hi) return n;
  }
  if (nodes_.size() >= std::numeric_limits<Node>::max() - 1) {
    throw Error(ErrorCode::InvalidArgument, "BDD node limit exceeded");
  }
  Node n = static_cast<Node>(nodes_.size());
  nodes_.push_back(Rec{v, rank, lo, hi, table_[b]});
  pmemo_.push_back(std::numeric_limits<double>::quiet_NaN());
  table_[b] = n;
  if (nodes_.size() > table_.size()) {
    rehash(table_.size() * 2);
    maybe_grow_cache();
  }
  return n;
}

void BddManager::maybe_grow_cache() {
  if (cache_.size() < kMaxCache && cache_.size() < nodes_.size()) {
    cache_.assign(std::min(kMaxCache, cache_.size() * 4), CacheEntry{});
  }
}

BddManager::CacheEntry& BddManager::cache_slot(Op op, Node a, Node b) {
  std::uint64_t h = mix((std::uint64_t{a} << 32 | b) * 3 + op);
  return cache_[h & (cache_.size() - 1)];
}

BddManager::Node BddManager::var(VarIndex v) {
  if (!declared(v)) {
    throw Error(ErrorCode::VarNotInOrder, "variable " + std::to_string(v) + " not in order");
  }
  return make(v, rank_[v], kFalse, kTrue);
}

BddManager::Node BddManager::negate(Node a) { return not_rec(a); }

BddManager::Node BddManager::not_rec(Node a) {
  if (a == kFalse) return kTrue;
  if (a == kTrue) return kFalse;
  auto& slot = cache_slot(kNot, a, 0);
  if (slot.op == kNot && slot.a == a) return slot.r;
  Rec r = nodes_[a];
  Node lo = not_rec(r.lo);
  Node hi = not_rec(r.hi);
  Node out = make(r.var, r.rank, lo, hi);
  auto& dst = cache_slot(kNot, a, 0);
  dst = CacheEntry{a, 0, kNot, out};
  return out;
}

BddManager::Node BddManager::conj(Node a, Node b) { return apply(kAnd, a, b); }
BddManager::Node BddManager::disj(Node a, Node b) { return apply(kOr, a, b); }

BddManager::Node BddManager::apply(Op op, Node a, Node b) {
  if (op == kAnd) {
    if (a == kFalse || b == kFalse) return kFalse;
    if (a == kTrue) return b;
    if (b == kTrue) return a;
  } else {
    if (a == kTrue || b == kTrue) return kTrue;
    if (a == kFalse) return b;
    if (b == kFalse) return a;
  }
  if (a == b) return a;
  if (a > b) std::swap(a, b);
  {
    const auto& slot = cache_slot(op, a, b);
    if (slot.op == op && slot.a == a && slot.b == b) return slot.r;
  }
  Rec ra = nodes_[a];
  Rec rb = nodes_[b];
  std::uint32_t rank = std::min(ra.rank, rb.rank);
  VarIndex v = ra.rank == rank ? ra.var : rb.var;
  Node a0 = ra.rank == rank ? ra.lo : a, a1 = ra.rank == rank ? ra.hi : a;
  Node b0 = rb.rank == rank ? rb.lo : b, b1 = rb.rank == rank ? rb.hi : b;
  Node lo = apply(op, a0, b0);
  Node hi = apply(op, a1, b1);
  Node out = make(v, rank, lo, hi);
  cache_slot(op, a, b) = CacheEntry{a, b, op, out};
  return out;
}

BddManager::Node BddManager::build(const Formula& f,
                                   const std::function<Node(std::uint32_t)>& resolve) {
  std::unordered_map<const void*, Node> memo;
  auto rec = [&](auto& self, const Formula& g) -> Node {
    switch (g.kind()) {
      case Formula::Kind::True: return kTrue;
      case Formula::Kind::False: return kFalse;
      case Formula::Kind::Var: return var(g.var_index());
      case Formula::Kind::Ref:
        if (!resolve) throw Error(ErrorCode::InvalidArgument, "unresolved derived-atom reference");
        return resolve(g.slot());
      default: break;
    }
    auto it = memo.find(g.id());
    if (it != memo.end()) return it->second;
    Node out;
    auto kids = g.children();
    if (g.kind() == Formula::Kind::Not) {
      out = not_rec(self(self, kids[0]));
    } else {
      bool is_and = g.kind() == Formula::Kind::And;
      out = is_and ? kTrue : kFalse;
      for (const auto& k : kids) {
        out = apply(is_and ? kAnd : kOr, out, self(self, k));
        if (out == (is_and ? kFalse : kTrue)) break;
      }
    }
    memo.emplace(g.id(), out);
    return out;
  };
  return rec(rec, f);
}

double BddManager::probability(Node n) {
  if (!std::isnan(pmemo_[n])) return pmemo_[n];
  std::vector<Node> stack{n};
  while (!stack.empty()) {
    Node m = stack.back();
    if (!std::isnan(pmemo_[m])) {
      stack.pop_back();
      continue;
    }
    const Rec& r = nodes_[m];
    bool ready = true;
    if (std::isnan(pmemo_[r.hi])) {
      stack.push_back(r.hi);
      ready = false;
    }
    if (std::isnan(pmemo_[r.lo])) {
      stack.push_back(r.lo);
      ready = false;
    }
    if (!ready) continue;
    double p = prob_[r.var];
    pmemo_[m] = p * pmemo_[r.hi] + (1.0 - p) * pmemo_[r.lo];
    stack.pop_back();
  }
  return pmemo_[n];
}

std::size_t BddManager::size(Node root) const {
  if (is_terminal(root)) return 0;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<Node> stack{root};
  std::size_t count = 0;
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (is_terminal(n) || seen[n]) continue;
    seen[n] = true;
    ++count;
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  return count;
}

void BddManager::collect(std::span<Node> roots) {
  std::vector<bool> live(nodes_.size(), false);
  live[kFalse] = live[kTrue] = true;
  std::vector<Node> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (live[n]) continue;
    live[n] = true;
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  // Children always precede parents, so a forward pass keeps that order.
  std::vector<Node> remap(nodes_.size(), kNil);
  remap[kFalse] = kFalse;
  remap[kTrue] = kTrue;
  Node next = 2;
  for (Node n = 2; n < nodes_.size(); ++n) {
    if (!live[n]) continue;
    Rec r = nodes_[n];
    r.lo = remap[r.lo];
    r.hi = remap[r.hi];
    nodes_[next] = r;
    pmemo_[next] = pmemo_[n];
    remap[n] = next++;
  }
  nodes_.resize(next);
  pmemo_.resize(next);
  std::size_t buckets = 1024;
  while (buckets < nodes_.size()) buckets *= 2;
  rehash(buckets);
  std::fill(cache_.begin(), cache_.end(), CacheEntry{});
  for (Node& r : roots) r = remap[r];
}

std::string BddManager::to_dot(Node root) const {
  std::string out = "digraph bdd {\n";
  out += "  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n";
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<Node> stack{root};
  std::vector<Node> order;
  while (!stack.empty()) {
    Node n = stack.back();
    stack.pop_back();
    if (is_terminal(n) || seen[n]) continue;
    seen[n] = true;
    order.push_back(n);
    stack.push_back(nodes_[n].hi);
    stack.push_back(nodes_[n].lo);
  }
  for (Node n : order) {
    out += "  n" + std::to_string(n) + " [label=\"x" + std::to_string(nodes_[n].var) + "\"];\n";
  }
  for (Node n : order) {
    out += "  n" + std::to_string(n) + " -> n" + std::to_string(nodes_[n].hi) +
           " [label=\"high\"];\n";
    out += "  n" + std::to_string(n) + " -> n" + std::to_string(nodes_[n].lo) +
           " [label=\"low\",style=dashed];\n";
  }
  out += "}\n";
  return out;
}

bool operator==(const Bdd& a, const Bdd& b) {
  std::unordered_map<std::uint64_t, bool> memo;
  auto rec = [&](auto& self, BddManager::Node x, BddManager::Node y) -> bool {
    const BddManager& ma = *a.mgr_;
    const BddManager& mb = *b.mgr_;
    if (ma.is_terminal(x) || mb.is_terminal(y)) {
      return ma.is_terminal(x) && mb.is_terminal(y) && x == y;
    }
    std::uint64_t key = std::uint64_t{x} << 32 | y;
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool eq = ma.node_var(x) == mb.node_var(y) && ma.node_rank(x) == mb.node_rank(y) &&
              self(self, ma.low(x), mb.low(y)) && self(self, ma.high(x), mb.high(y));
    memo.emplace(key, eq);
    return eq;
  };
  return rec(rec, a.root_, b.root_);
}

namespace {

// Variable probabilities as recorded on the formula's Var leaves.
std::unordered_map<VarIndex, double> leaf_probs(std::span<const Formula> fs) {
  std::unordered_map<VarIndex, double> probs;
  std::unordered_map<const void*, bool> seen;
  std::vector<const Formula*> stack;
  for (const auto& f : fs) stack.push_back(&f);
  while (!stack.empty()) {
    const Formula* f = stack.back();
    stack.pop_back();
    if (!seen.emplace(f->id(), true).second) continue;
    if (f->kind() == Formula::Kind::Ref) {
      throw Error(ErrorCode::InvalidArgument, "formula contains an unresolved reference");
    }
    if (f->kind() == Formula::Kind::Var) {
      auto [it, fresh] = probs.emplace(f->var_index(), f->prob());
      if (!fresh && it->second != f->prob()) {
        throw Error(ErrorCode::InvalidArgument,
                    "variable " + std::to_string(f->var_index()) + " has two probabilities");
      }
    }
    for (const auto& c : f->children()) stack.push_back(&c);
  }
  return probs;
}

}  // namespace

Bdd compile(const Formula& f, std::span<const VarIndex> order) {
  auto probs = leaf_probs(std::span<const Formula>(&f, 1));
  auto mgr = std::make_shared<BddManager>();
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = probs.find(order[i]);
    mgr->declare(order[i], static_cast<std::uint32_t>(i), it == probs.end() ? 0.0 : it->second);
  }
  for (const auto& [v, p] : probs) {
    if (!mgr->declared(v)) {
      throw Error(ErrorCode::VarNotInOrder, "variable " + std::to_string(v) + " not in order");
    }
  }
  BddManager::Node root = mgr->build(f);
  return Bdd(std::move(mgr), root);
}

Bdd compile(const Formula& f) {
  auto order = f.support();
  return compile(f, order);
}

double probability(const Bdd& b) { return b.manager().probability(b.root()); }

std::string to_dot(const Bdd& b) { return b.manager().to_dot(b.root()); }

std::vector<double> world_enumeration(std::span<const Formula> fs) {
  auto probs = leaf_probs(fs);
  std::vector<VarIndex> vars;
  for (const auto& [v, p] : probs) vars.push_back(v);
  std::sort(vars.begin(), vars.end());
  if (vars.size() > 25) {
    throw Error(ErrorCode::TooManyVars,
                std::to_string(vars.size()) + " variables exceed the enumeration limit of 25");
  }
  std::unordered_map<VarIndex, std::size_t> pos;
  for (std::size_t i = 0; i < vars.size(); ++i) pos[vars[i]] = i;

  // Flatten the DAG children-first; each step evaluates 64 worlds at once.
  struct Step {
    Formula::Kind kind;
    std::size_t var = 0;
    std::vector<std::size_t> kids;
  };
  std::vector<Step> steps;
  std::unordered_map<const void*, std::size_t> index;
  auto flatten = [&](auto& self, const Formula& f) -> std::size_t {
    auto it = index.find(f.id());
    if (it != index.end()) return it->second;
    Step s{f.kind(), 0, {}};
    if (f.kind() == Formula::Kind::Var) s.var = pos.at(f.var_index());
    for (const auto& c : f.children()) s.kids.push_back(self(self, c));
    steps.push_back(std::move(s));
    index.emplace(f.id(), steps.size() - 1);
    return steps.size() - 1;
  };
  std::vector<std::size_t> roots;
  for (const auto& f : fs) roots.push_back(flatten(flatten, f));

  const std::size_t n = vars.size();
  const std::size_t low_bits = std::min<std::size_t>(n, 6);
  const std::size_t lanes = std::size_t{1} << low_bits;
  const std::uint64_t lane_mask = lanes == 64 ? ~0ULL : (1ULL << lanes) - 1;
  static constexpr std::uint64_t kPattern[6] = {
      0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
      0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};

  std::vector<double> lane_weight(lanes, 1.0);
  for (std::size_t m = 0; m < lanes; ++m) {
    for (std::size_t i = 0; i < low_bits; ++i) {
      double p = probs[vars[i]];
      lane_weight[m] *= (m >> i & 1) ? p : 1.0 - p;
    }
  }

  std::vector<double> out(fs.size(), 0.0);
  std::vector<std::uint64_t> val(steps.size());
  const std::size_t blocks = std::size_t{1} << (n - low_bits);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    double block_weight = 1.0;
    for (std::size_t i = low_bits; i < n; ++i) {
      double p = probs[vars[i]];
      block_weight *= (blk >> (i - low_bits) & 1) ? p : 1.0 - p;
    }
    if (block_weight == 0.0) continue;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const Step& s = steps[k];
      std::uint64_t v = 0;
      switch (s.kind) {
        case Formula::Kind::True: v = ~0ULL; break;
        case Formula::Kind::False: v = 0; break;
        case Formula::Kind::Var:
          v = s.var < low_bits ? kPattern[s.var]
                               : ((blk >> (s.var - low_bits) & 1) ? ~0ULL : 0);
          break;
        case Formula::Kind::Not: v = ~val[s.kids[0]]; break;
        case Formula::Kind::And:
          v = ~0ULL;
          for (auto c : s.kids) v &= val[c];
          break;
        case Formula::Kind::Or:
          for (auto c : s.kids) v |= val[c];
          break;
        case Formula::Kind::Ref: break;
      }
      val[k] = v;
    }
    for (std::size_t r = 0; r < roots.size(); ++r) {
      std::uint64_t bits = val[roots[r]] & lane_mask;
      double sum = 0.0;
      while (bits) {
        int lane = __builtin_ctzll(bits);
        sum += lane_weight[lane];
        bits &= bits - 1;
      }
      out[r] += block_weight * sum;
    }
  }
  return out;
}

double world_enumeration(const Formula& f) {
  return world_enumeration(std::span<const Formula>(&f, 1))[0];
}

}  // namespace probec
