#include "probec/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "probec/error.hpp"

namespace probec {

namespace {

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 output is fixed by the standard; the distributions are not, so
// the transforms below are spelled out to keep results portable.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : g_(seed) {}

  // Uniform on (0, 1).
  double open01() { return (static_cast<double>(g_() >> 11) + 0.5) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do r = g_(); while (r >= limit);
    return r % n;
  }

  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Gamma(2, mean/2) as the sum of two exponentials, mapped to exp(-x).
  double noisy_prob(double mean) {
    double e = -std::log(open01()) - std::log(open01());
    return std::exp(-0.5 * mean * e);
  }

 private:
  std::mt19937_64 g_;
};

enum : std::uint64_t { kStaStream = 1, kSpatialStream = 2, kSpuriousStream = 3 };

const Symbol& walking() {
  static const Symbol s("walking");
  return s;
}
const Symbol& coord() {
  static const Symbol s("coord");
  return s;
}
const Symbol& orientation() {
  static const Symbol s("orientation");
  return s;
}

bool spatial(const ProbFact& f) {
  return f.body.kind == FactKind::Holds &&
         (f.body.term.functor == coord() || f.body.term.functor == orientation());
}

const Arg* subject(const ProbFact& f) {
  return f.body.term.args.empty() ? nullptr : &f.body.term.args.front();
}

}  // namespace

const char* to_string(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::Smooth: return "smooth";
    case NoiseLevel::Intermediate: return "intermediate";
    case NoiseLevel::Strong: return "strong";
  }
  return "?";
}

NoiseLevel parse_noise_level(std::string_view name) {
  if (name == "smooth") return NoiseLevel::Smooth;
  if (name == "intermediate") return NoiseLevel::Intermediate;
  if (name == "strong") return NoiseLevel::Strong;
  throw Error(ErrorCode::InvalidArgument,
              "unknown noise level '" + std::string(name) + "' (smooth, intermediate, strong)");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix(s);
  s = a ^ (stream * 0xd1b54a32d192ed03ULL);
  return splitmix(s);
}

bool is_spurious_entity(Symbol entity) { return entity.name().rfind("ghost", 0) == 0; }

bool is_spurious(const ProbFact& f) {
  const Arg* a = subject(f);
  const Symbol* s = a ? std::get_if<Symbol>(a) : nullptr;
  return s && is_spurious_entity(*s);
}

Narrative inject(const Narrative& n, const NoiseConfig& cfg) {
  if (!(cfg.gamma_mean > 0)) throw Error(ErrorCode::InvalidArgument, "gamma mean must be positive");
  if (!(cfg.spurious_fraction >= 0 && cfg.spurious_fraction <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "spurious fraction must lie in [0,1]");
  }
  Stream sta(derive_seed(cfg.seed, kStaStream));
  Stream space(derive_seed(cfg.seed, kSpatialStream));
  const bool noisy_space = cfg.level != NoiseLevel::Smooth;

  std::vector<ProbFact> out(n.facts().begin(), n.facts().end());
  for (auto& f : out) {
    if (f.body.kind == FactKind::Happens && is_sta_functor(f.body.term.functor)) {
      f.prob = sta.noisy_prob(cfg.gamma_mean);
    } else if (spatial(f)) {
      // Drawn at every level so the STA stream stays aligned across levels.
      double p = space.noisy_prob(cfg.gamma_mean);
      if (noisy_space) f.prob = p;
    }
  }
  if (cfg.level != NoiseLevel::Strong) return Narrative::index(std::move(out));

  // Frames with a walking STA, each with the first walker in fact order.
  struct Walk {
    Frame t;
    std::size_t fact;
  };
  std::vector<Walk> walks;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& f = out[i];
    if (f.body.kind != FactKind::Happens || f.body.term.functor != walking()) continue;
    if (walks.empty() || walks.back().t != f.body.frame) walks.push_back({f.body.frame, i});
  }

  Stream pick(derive_seed(cfg.seed, kSpuriousStream));
  const auto want = static_cast<std::size_t>(std::llround(cfg.spurious_fraction * static_cast<double>(walks.size())));
  for (std::size_t i = 0; i < want; ++i) {
    std::size_t j = i + static_cast<std::size_t>(pick.below(walks.size() - i));
    std::swap(walks[i], walks[j]);
  }
  walks.resize(want);
  std::sort(walks.begin(), walks.end(), [](const Walk& a, const Walk& b) { return a.t < b.t; });

  std::vector<ProbFact> extra;
  std::size_t ghost = 0;
  for (const auto& w : walks) {
    const ProbFact& walker = out[w.fact];
    const double p = 1.0 - walker.prob;
    Symbol name("ghost" + std::to_string(ghost++));
    ProbFact g;
    g.body.kind = FactKind::Happens;
    g.body.term = Term{walking(), {name}};
    g.body.frame = w.t;
    g.prob = p;
    extra.push_back(g);

    const std::int64_t dx = pick.between(-20, 20), dy = pick.between(-20, 20);
    const std::int64_t dor = pick.between(-20, 20);
    const Arg* who = subject(walker);
    for (FactId id : n.holds(w.t, coord())) {
      const auto& c = n.fact(id);
      if (who && subject(c) && *subject(c) == *who) {
        const auto& xy = std::get<Coord>(c.body.value);
        ProbFact gc{{FactKind::Holds, Term{coord(), {name}}, Coord{xy.x + dx, xy.y + dy}, w.t}, p};
        extra.push_back(gc);
        break;
      }
    }
    for (FactId id : n.holds(w.t, orientation())) {
      const auto& o = n.fact(id);
      if (who && subject(o) && *subject(o) == *who) {
        if (const auto* deg = std::get_if<std::int64_t>(&o.body.value)) {
          std::int64_t v = ((*deg + dor) % 360 + 360) % 360;
          extra.push_back({{FactKind::Holds, Term{orientation(), {name}}, v, w.t}, p});
        }
        break;
      }
    }
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return Narrative::index(std::move(out));
}

Narrative filter_for_crisp(const Narrative& n, double threshold) {
  std::vector<ProbFact> out;
  out.reserve(n.size());
  for (const auto& f : n.facts()) {
    if (f.prob > threshold) {
      out.push_back(f);
      out.back().prob = 1.0;
    }
  }
  return Narrative::index(std::move(out));
}

}  // namespace probec
