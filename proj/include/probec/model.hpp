#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace probec {

// Video frame number.
using Frame = std::int64_t;

// Interned identifier. Equality is pointer identity, ordering is by name so
// containers iterate in the same order regardless of interning order.
class Symbol {
 public:
  Symbol();
  explicit Symbol(std::string_view name);

  const std::string& name() const noexcept { return *name_; }
  bool empty() const noexcept { return name_->empty(); }
  const void* key() const noexcept { return name_; }

  friend bool operator==(Symbol a, Symbol b) noexcept { return a.name_ == b.name_; }
  friend std::strong_ordering operator<=>(Symbol a, Symbol b) noexcept {
    if (a.name_ == b.name_) return std::strong_ordering::equal;
    return a.name_->compare(*b.name_) < 0 ? std::strong_ordering::less
                                           : std::strong_ordering::greater;
  }

 private:
  const std::string* name_;
};

using Arg = std::variant<Symbol, std::int64_t>;

struct Term {
  Symbol functor;
  std::vector<Arg> args;

  friend bool operator==(const Term&, const Term&) = default;
  friend bool operator<(const Term& a, const Term& b) {
    if (a.functor != b.functor) return a.functor < b.functor;
    return a.args < b.args;
  }
};

struct Coord {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

// Fluent value: Boolean, integer (orientation) or pixel coordinate pair.
using Value = std::variant<bool, std::int64_t, Coord>;

enum class FactKind : std::uint8_t { Happens, Holds, Initially };

struct FactBody {
  FactKind kind = FactKind::Happens;
  Term term;
  Value value = true;  // unused for Happens
  Frame frame = 0;     // unused for Initially

  friend bool operator==(const FactBody&, const FactBody&) = default;
};

struct ProbFact {
  FactBody body;
  double prob = 1.0;

  friend bool operator==(const ProbFact&, const ProbFact&) = default;
};

using FactId = std::uint32_t;

// Functors of the mutually exclusive short-term activities.
bool is_sta_functor(Symbol functor);

std::string to_string(const Arg& arg);
std::string to_string(const Term& term);
std::string to_string(const Value& value);
std::string to_string(const FactBody& body);

std::size_t hash_value(const Term& term);
std::size_t hash_value(const Value& value);
std::size_t hash_value(const FactBody& body);

struct TermHash {
  std::size_t operator()(const Term& t) const { return hash_value(t); }
};

// Facts of one trace, sorted by frame and indexed by (frame, functor).
// Immutable once built.
class Narrative {
 public:
  Narrative() = default;

  // Sorts (stably) by frame, normalises orientation values to [0,360), and
  // rejects duplicate bodies or probabilities outside [0,1].
  static Narrative index(std::vector<ProbFact> facts);

  std::span<const ProbFact> facts() const noexcept { return facts_; }
  const ProbFact& fact(FactId id) const { return facts_[id]; }
  std::size_t size() const noexcept { return facts_.size(); }
  bool empty() const noexcept { return facts_.empty(); }
  Frame horizon() const noexcept { return horizon_; }

  // All facts whose frame is `t` (initially facts excluded).
  std::span<const ProbFact> facts_at(Frame t) const;
  std::span<const FactId> happens(Frame t, Symbol functor) const;
  std::span<const FactId> holds(Frame t, Symbol functor) const;
  std::span<const FactId> initially() const noexcept { return initially_; }

  // True when every probability is exactly 0 or 1.
  bool is_crisp() const;
  // True when every probability is exactly 1.
  bool all_certain() const;

  FactId id_of(const ProbFact& f) const {
    return static_cast<FactId>(&f - facts_.data());
  }

 private:
  struct Key {
    Frame frame;
    const void* functor;
    FactKind kind;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  std::span<const FactId> lookup(Frame t, Symbol functor, FactKind kind) const;

  std::vector<ProbFact> facts_;
  std::vector<FactId> initially_;
  std::unordered_map<Key, std::vector<FactId>, KeyHash> index_;
  Frame horizon_ = 0;
};

}  // namespace probec
