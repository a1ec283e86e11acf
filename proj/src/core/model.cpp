#include "probec/model.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <unordered_set>

#include "probec/error.hpp"

namespace probec {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::DuplicateFact: return "DuplicateFact";
    case ErrorCode::UnboundHeadVariable: return "UnboundHeadVariable";
    case ErrorCode::UnsafeVariable: return "UnsafeVariable";
    case ErrorCode::CyclicFluentDependency: return "CyclicFluentDependency";
    case ErrorCode::UnknownFluent: return "UnknownFluent";
    case ErrorCode::TooManyVars: return "TooManyVars";
    case ErrorCode::VarNotInOrder: return "VarNotInOrder";
    case ErrorCode::NotCrisp: return "NotCrisp";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
  }
  return "Error";
}

Error::Error(ErrorCode code, const std::string& message, std::size_t line,
             std::size_t column)
    : std::runtime_error(message), code_(code), line_(line), column_(column) {}

namespace {

struct SymbolTable {
  std::mutex mu;
  std::unordered_set<std::string> names;
};

SymbolTable& symbols() {
  static SymbolTable* table = new SymbolTable;
  return *table;
}

const std::string* intern(std::string_view name) {
  auto& t = symbols();
  std::lock_guard lock(t.mu);
  return &*t.names.emplace(name).first;
}

void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace

Symbol::Symbol() {
  static const std::string* const empty = intern("");
  name_ = empty;
}
Symbol::Symbol(std::string_view name) : name_(intern(name)) {}

bool is_sta_functor(Symbol functor) {
  static const Symbol kSta[] = {Symbol("walking"), Symbol("running"), Symbol("active"),
                                Symbol("inactive"), Symbol("abrupt")};
  return std::find(std::begin(kSta), std::end(kSta), functor) != std::end(kSta);
}

std::string to_string(const Arg& arg) {
  if (const auto* s = std::get_if<Symbol>(&arg)) return s->name();
  return std::to_string(std::get<std::int64_t>(arg));
}

std::string to_string(const Term& term) {
  std::string out = term.functor.name();
  if (!term.args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < term.args.size(); ++i) {
      if (i) out += ',';
      out += to_string(term.args[i]);
    }
    out += ')';
  }
  return out;
}

std::string to_string(const Value& value) {
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  const auto& c = std::get<Coord>(value);
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

std::string to_string(const FactBody& body) {
  switch (body.kind) {
    case FactKind::Happens:
      return "happensAt(" + to_string(body.term) + "," + std::to_string(body.frame) + ")";
    case FactKind::Holds:
      return "holdsAt(" + to_string(body.term) + "=" + to_string(body.value) + "," +
             std::to_string(body.frame) + ")";
    case FactKind::Initially:
      return "initially(" + to_string(body.term) + "=" + to_string(body.value) + ")";
  }
  return {};
}

std::size_t hash_value(const Term& term) {
  std::size_t h = std::hash<const void*>{}(term.functor.key());
  for (const auto& a : term.args) {
    if (const auto* s = std::get_if<Symbol>(&a)) {
      hash_combine(h, std::hash<const void*>{}(s->key()));
    } else {
      hash_combine(h, std::hash<std::int64_t>{}(std::get<std::int64_t>(a)) ^ 0x51ULL);
    }
  }
  return h;
}

std::size_t hash_value(const Value& value) {
  std::size_t h = value.index();
  if (const auto* b = std::get_if<bool>(&value)) {
    hash_combine(h, *b ? 1 : 0);
  } else if (const auto* i = std::get_if<std::int64_t>(&value)) {
    hash_combine(h, std::hash<std::int64_t>{}(*i));
  } else {
    const auto& c = std::get<Coord>(value);
    hash_combine(h, std::hash<std::int64_t>{}(c.x));
    hash_combine(h, std::hash<std::int64_t>{}(c.y));
  }
  return h;
}

std::size_t hash_value(const FactBody& body) {
  std::size_t h = static_cast<std::size_t>(body.kind);
  hash_combine(h, hash_value(body.term));
  if (body.kind != FactKind::Happens) hash_combine(h, hash_value(body.value));
  if (body.kind != FactKind::Initially) hash_combine(h, std::hash<Frame>{}(body.frame));
  return h;
}

std::size_t Narrative::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = std::hash<Frame>{}(k.frame);
  hash_combine(h, std::hash<const void*>{}(k.functor));
  hash_combine(h, static_cast<std::size_t>(k.kind));
  return h;
}

namespace {

const Symbol& orientation_symbol() {
  static const Symbol s("orientation");
  return s;
}

Frame sort_frame(const ProbFact& f) {
  return f.body.kind == FactKind::Initially ? -1 : f.body.frame;
}

struct BodyHash {
  std::size_t operator()(const FactBody* b) const { return hash_value(*b); }
};
struct BodyEq {
  bool operator()(const FactBody* a, const FactBody* b) const { return *a == *b; }
};

}  // namespace

Narrative Narrative::index(std::vector<ProbFact> facts) {
  for (auto& f : facts) {
    if (!(f.prob >= 0.0 && f.prob <= 1.0)) {
      throw Error(ErrorCode::InvalidProbability,
                  "probability " + std::to_string(f.prob) + " outside [0,1] for " +
                      to_string(f.body));
    }
    if (f.body.kind == FactKind::Initially) f.body.frame = 0;
    if (f.body.kind == FactKind::Happens) f.body.value = true;
    if (f.body.kind != FactKind::Happens && f.body.term.functor == orientation_symbol()) {
      if (auto* deg = std::get_if<std::int64_t>(&f.body.value)) {
        *deg = ((*deg % 360) + 360) % 360;
      }
    }
    if (f.body.kind != FactKind::Initially && f.body.frame < 0) {
      throw Error(ErrorCode::InvalidArgument, "negative frame in " + to_string(f.body));
    }
  }

  std::stable_sort(facts.begin(), facts.end(), [](const ProbFact& a, const ProbFact& b) {
    return sort_frame(a) < sort_frame(b);
  });

  {
    std::unordered_set<const FactBody*, BodyHash, BodyEq> seen;
    seen.reserve(facts.size());
    for (const auto& f : facts) {
      if (!seen.insert(&f.body).second) {
        throw Error(ErrorCode::DuplicateFact, "duplicate fact " + to_string(f.body));
      }
    }
  }

  Narrative n;
  n.facts_ = std::move(facts);
  for (FactId id = 0; id < n.facts_.size(); ++id) {
    const auto& f = n.facts_[id];
    if (f.body.kind == FactKind::Initially) {
      n.initially_.push_back(id);
      continue;
    }
    n.horizon_ = std::max(n.horizon_, f.body.frame);
    n.index_[Key{f.body.frame, f.body.term.functor.key(), f.body.kind}].push_back(id);
  }
  return n;
}

std::span<const ProbFact> Narrative::facts_at(Frame t) const {
  auto lo = std::lower_bound(facts_.begin(), facts_.end(), t,
                             [](const ProbFact& f, Frame v) { return sort_frame(f) < v; });
  auto hi = std::upper_bound(lo, facts_.end(), t,
                             [](Frame v, const ProbFact& f) { return v < sort_frame(f); });
  return {lo, hi};
}

std::span<const FactId> Narrative::lookup(Frame t, Symbol functor, FactKind kind) const {
  auto it = index_.find(Key{t, functor.key(), kind});
  if (it == index_.end()) return {};
  return it->second;
}

std::span<const FactId> Narrative::happens(Frame t, Symbol functor) const {
  return lookup(t, functor, FactKind::Happens);
}

std::span<const FactId> Narrative::holds(Frame t, Symbol functor) const {
  return lookup(t, functor, FactKind::Holds);
}

bool Narrative::is_crisp() const {
  return std::all_of(facts_.begin(), facts_.end(),
                     [](const ProbFact& f) { return f.prob == 0.0 || f.prob == 1.0; });
}

bool Narrative::all_certain() const {
  return std::all_of(facts_.begin(), facts_.end(),
                     [](const ProbFact& f) { return f.prob == 1.0; });
}

}  // namespace probec
