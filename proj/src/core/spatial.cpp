#include "probec/spatial.hpp"

#include <cmath>

#include "probec/rules.hpp"

namespace probec {

double distance(Coord a, Coord b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

std::vector<FactId> coord_facts(const Narrative& n, Symbol entity, Frame t) {
  std::vector<FactId> out;
  for (FactId id : n.holds(t, coord_symbol())) {
    const auto& body = n.fact(id).body;
    if (body.term.args.size() != 1 || !std::holds_alternative<Coord>(body.value)) continue;
    const auto* s = std::get_if<Symbol>(&body.term.args[0]);
    if (s && *s == entity) out.push_back(id);
  }
  return out;
}

double close_prob(const Narrative& n, Symbol a, Symbol b, double threshold, Frame t) {
  double total = 0.0;
  auto fa = coord_facts(n, a, t);
  auto fb = coord_facts(n, b, t);
  for (FactId i : fa) {
    for (FactId j : fb) {
      Coord ca = std::get<Coord>(n.fact(i).body.value);
      Coord cb = std::get<Coord>(n.fact(j).body.value);
      if (distance(ca, cb) < threshold) {
        total += i == j ? n.fact(i).prob : n.fact(i).prob * n.fact(j).prob;
      }
    }
  }
  return total;
}

std::int64_t orientation_diff(std::int64_t o1, std::int64_t o2) {
  return o1 > o2 ? o1 - o2 : o2 - o1;
}

}  // namespace probec
