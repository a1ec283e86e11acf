#include "probec/formula.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "probec/error.hpp"

namespace probec {

struct Formula::Node {
  Kind kind;
  VarIndex var = 0;  // Var index or Ref slot
  double prob = 0;
  std::vector<Formula> kids;
};

namespace {

const std::shared_ptr<const Formula::Node>& constant(bool value) {
  static const auto t = std::make_shared<const Formula::Node>(Formula::Node{Formula::Kind::True, 0, 0, {}});
  static const auto f = std::make_shared<const Formula::Node>(Formula::Node{Formula::Kind::False, 0, 0, {}});
  return value ? t : f;
}

}  // namespace

Formula::Formula() : node_(constant(false)) {}

Formula Formula::top() { return Formula(constant(true)); }
Formula Formula::bottom() { return Formula(constant(false)); }

Formula Formula::var(VarIndex v, double prob) {
  if (prob >= 1.0) return top();
  if (prob <= 0.0) return bottom();
  return raw_var(v, prob);
}

Formula Formula::raw_var(VarIndex v, double prob) {
  return Formula(std::make_shared<const Node>(Node{Kind::Var, v, prob, {}}));
}

Formula Formula::ref(std::uint32_t slot) {
  return Formula(std::make_shared<const Node>(Node{Kind::Ref, slot, 0, {}}));
}

Formula Formula::conj(std::vector<Formula> parts) {
  std::vector<Formula> kept;
  kept.reserve(parts.size());
  std::unordered_set<const void*> seen;
  for (auto& p : parts) {
    if (p.is_false()) return bottom();
    if (p.is_true()) continue;
    if (p.kind() == Kind::And) {
      for (const auto& c : p.children()) {
        if (seen.insert(c.id()).second) kept.push_back(c);
      }
    } else if (seen.insert(p.id()).second) {
      kept.push_back(std::move(p));
    }
  }
  if (kept.empty()) return top();
  if (kept.size() == 1) return kept.front();
  return Formula(std::make_shared<const Node>(Node{Kind::And, 0, 0, std::move(kept)}));
}

Formula Formula::disj(std::vector<Formula> parts) {
  std::vector<Formula> kept;
  kept.reserve(parts.size());
  std::unordered_set<const void*> seen;
  for (auto& p : parts) {
    if (p.is_true()) return top();
    if (p.is_false()) continue;
    if (p.kind() == Kind::Or) {
      for (const auto& c : p.children()) {
        if (seen.insert(c.id()).second) kept.push_back(c);
      }
    } else if (seen.insert(p.id()).second) {
      kept.push_back(std::move(p));
    }
  }
  if (kept.empty()) return bottom();
  if (kept.size() == 1) return kept.front();
  return Formula(std::make_shared<const Node>(Node{Kind::Or, 0, 0, std::move(kept)}));
}

Formula operator!(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::True: return Formula::bottom();
    case Formula::Kind::False: return Formula::top();
    case Formula::Kind::Not: return f.children()[0];
    default:
      return Formula(std::make_shared<const Formula::Node>(
          Formula::Node{Formula::Kind::Not, 0, 0, {f}}));
  }
}

Formula operator&&(const Formula& a, const Formula& b) { return Formula::conj({a, b}); }
Formula operator||(const Formula& a, const Formula& b) { return Formula::disj({a, b}); }

Formula::Kind Formula::kind() const noexcept { return node_->kind; }
VarIndex Formula::var_index() const noexcept { return node_->var; }
double Formula::prob() const noexcept { return node_->prob; }
std::uint32_t Formula::slot() const noexcept { return node_->var; }
std::span<const Formula> Formula::children() const noexcept { return node_->kids; }

std::vector<VarIndex> Formula::support() const {
  std::vector<VarIndex> out;
  std::unordered_set<const void*> seen;
  std::vector<const Formula*> stack{this};
  while (!stack.empty()) {
    const Formula* f = stack.back();
    stack.pop_back();
    if (!seen.insert(f->id()).second) continue;
    if (f->kind() == Kind::Var) out.push_back(f->var_index());
    for (const auto& c : f->children()) stack.push_back(&c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Formula::eval(const std::vector<bool>& assignment) const {
  std::unordered_map<const void*, bool> memo;
  auto rec = [&](auto& self, const Formula& f) -> bool {
    switch (f.kind()) {
      case Kind::True: return true;
      case Kind::False: return false;
      case Kind::Var: return assignment.at(f.var_index());
      case Kind::Ref: throw Error(ErrorCode::InvalidArgument, "cannot evaluate unresolved reference");
      default: break;
    }
    auto it = memo.find(f.id());
    if (it != memo.end()) return it->second;
    bool r;
    if (f.kind() == Kind::Not) {
      r = !self(self, f.children()[0]);
    } else if (f.kind() == Kind::And) {
      r = std::all_of(f.children().begin(), f.children().end(),
                      [&](const Formula& c) { return self(self, c); });
    } else {
      r = std::any_of(f.children().begin(), f.children().end(),
                      [&](const Formula& c) { return self(self, c); });
    }
    memo.emplace(f.id(), r);
    return r;
  };
  return rec(rec, *this);
}

}  // namespace probec
